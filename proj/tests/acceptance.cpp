// Acceptance runner: `acceptance --criterion N` checks one criterion,
// `acceptance` checks all ten. One PASS/FAIL line per criterion.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "helpers.hpp"
#include "nsfd/convergence.hpp"
#include "nsfd/pde_problems.hpp"
#include "nsfd/scheme.hpp"
#include "nsfd/solver.hpp"
#include "nsfd/spectral_checks.hpp"
#include "nsfd/stencil.hpp"

using namespace nsfd;

namespace {

// Pinned tolerances.
constexpr double kTableFactor = 2.0;
constexpr double kMinOrderSmooth = 1.5;
constexpr double kMinOrderKink = 0.25;
constexpr double kMaxOrderKink = 0.55;
constexpr double kExactTol = 1e-12;
constexpr double kIdentityTol = 1e-12;
constexpr double kProbeTol = 1e-12;
constexpr double kEulerNewtonTol = 1e-6;
constexpr double kStabilityFactor = 10.0;
constexpr double kFactorTol = 1e-12;
constexpr double kScalingTol = 0.2;
constexpr double kGhostTol = 1e-12;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string fix(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// Reference (h, error) pairs reproduced by criteria 1-3.
struct TableCase {
  const char* problem;
  std::vector<double> h;
  std::vector<double> errors;
};

std::vector<ConvergenceRow> run_table(const TableCase& t, Outcome& out) {
  const ManufacturedProblem p = make_problem(t.problem);
  const double length = p.domain.upper[0] - p.domain.lower[0];
  RunConfig cfg;
  cfg.problem = t.problem;
  cfg.gamma = 4.0;
  cfg.beta = 0.0;
  cfg.h_convention = HConvention::Diagonal;
  cfg.finest_unlock = true;
  for (double h : t.h) {
    const int j = grid_size_from_diagonal_h(h, length, static_cast<int>(p.domain.dim()));
    cfg.grid_sizes.push_back({j, j});
  }
  std::vector<ConvergenceRow> rows = run_convergence(cfg);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const ConvergenceRow& r = rows[k];
    const double ratio = r.error_linf / t.errors[k];
    out.detail << " J=" << r.sizes[0] << " err=" << sci(r.error_linf) << " (reference " << sci(t.errors[k]) << ")";
    if (r.order) out.detail << " order=" << fix(*r.order);
    out.require(r.converged, "solver converged on J=" + std::to_string(r.sizes[0]));
    out.require(ratio >= 1.0 / kTableFactor && ratio <= kTableFactor,
                "error within factor 2 on J=" + std::to_string(r.sizes[0]));
  }
  return rows;
}

const TableCase kTable1{"test1", {3.63e-2, 2.40e-2, 1.79e-2, 1.19e-2}, {7.25e-1, 3.72e-1, 2.25e-1, 1.09e-1}};

void criterion1(Outcome& out) {
  const auto rows = run_table(kTable1, out);
  for (std::size_t k = rows.size() - 2; k < rows.size(); ++k)
    out.require(rows[k].order && *rows[k].order >= kMinOrderSmooth, "order >= 1.5 on the last refinements");
}

void criterion2(Outcome& out) {
  const auto rows = run_table({"test2", {9.43e-2, 6.15e-2, 4.56e-2}, {2.60e-1, 1.28e-1, 7.32e-2}}, out);
  out.require(rows.back().order && *rows.back().order >= kMinOrderSmooth, "final order >= 1.5");
}

void criterion3(Outcome& out) {
  const auto rows =
      run_table({"test3", {6.15e-2, 4.56e-2, 3.63e-2, 2.89e-2}, {3.38e-2, 3.01e-2, 2.73e-2, 2.50e-2}}, out);
  for (std::size_t k = 1; k < rows.size(); ++k)
    out.require(rows[k].order && *rows[k].order >= kMinOrderKink && *rows[k].order <= kMaxOrderKink,
                "order in [0.25, 0.55]");
}

// Every stencil operator that is second-order accurate reproduces the
// derivatives of a quadratic exactly.
void criterion4(Outcome& out) {
  std::mt19937_64 rng(2024);
  const GridPtr g = make_grid(DomainBox{{-0.5, 0.0}, {0.5, 2.0}}, {9, 9});
  double worst = 0.0;
  int checks = 0;
  auto rel = [&](double got, double want) {
    worst = std::max(worst, testing::rel_err(got, want));
    ++checks;
  };
  for (int trial = 0; trial < 50; ++trial) {
    const testing::Quadratic q = testing::random_quadratic(2, rng);
    const GridFunction u = GridFunction::sample_extended(g, q);
    for (std::size_t f : g->interior_nodes()) {
      const Point x = g->coord_flat(f);
      const Matrix& hq = q.hess;
      const Vector grad = q.gradient(x);
      for (int i = 0; i < 2; ++i) {
        rel(second_diff(u, f, i, Width::H), hq(i, i));
        rel(second_diff(u, f, i, Width::TwoH), hq(i, i));
        rel(tilde_diagonal(u, f, i), hq(i, i));
        rel(gradients(u, f).central[i], grad[i]);
        for (Side mu : {Side::Forward, Side::Backward})
          for (Side nu : {Side::Forward, Side::Backward})
            for (int j = 0; j < 2; ++j) rel(sided_hessian(u, f, i, j, mu, nu), hq(i, j));
      }
      for (MixedFlavor fl : {MixedFlavor::Hat, MixedFlavor::Tilde, MixedFlavor::Bar})
        rel(mixed_second(u, f, 0, 1, fl), hq(0, 1));
      const double h0 = g->spacing(0);
      const double h1 = g->spacing(1);
      const double along = (h0 * h0 * hq(0, 0) + h1 * h1 * hq(1, 1)) / (h0 * h0 + h1 * h1);
      const double cross = 2.0 * h0 * h1 * hq(0, 1) / (h0 * h0 + h1 * h1);
      rel(diag_second(u, f, 0, 1, Diagonal::Eta), along + cross);
      rel(diag_second(u, f, 0, 1, Diagonal::Xi), along - cross);
      const DiscreteHessians hs = hessians(u, f);
      for (const Matrix* m : {&hs.hat, &hs.tilde, &hs.bar, &hs.standard})
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) rel((*m)(i, j), hq(i, j));
      const Matrix md = moment_difference(u, f);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) rel(md(i, j), 0.0);
    }
  }
  out.detail << " " << checks << " values, worst relative error " << sci(worst);
  out.require(worst <= kExactTol, "relative error <= 1e-12");
}

void criterion5(Outcome& out) {
  std::mt19937_64 rng(7);
  const GridPtr g = make_grid(DomainBox{{0.0, 0.0}, {1.0, 1.5}}, {9, 8});
  const double h[2] = {g->spacing(0), g->spacing(1)};
  std::array<double, 6> worst{};
  auto rel = [](double lhs, double rhs, double scale) { return std::abs(lhs - rhs) / std::max(1.0, scale); };
  for (int trial = 0; trial < 50; ++trial) {
    const GridFunction u = testing::random_extended(g, rng);
    for (std::size_t f : g->interior_nodes()) {
      const int i = 0;
      const int j = 1;
      const double eta = diag_second(u, f, i, j, Diagonal::Eta);
      const double xi = diag_second(u, f, i, j, Diagonal::Xi);
      const double di = second_diff(u, f, i, Width::H);
      const double dj = second_diff(u, f, j, Width::H);
      const double s = (h[i] * h[i] + h[j] * h[j]) / (h[i] * h[j]);
      const DiscreteHessians hs = hessians(u, f);
      const double scale = std::abs(eta) + std::abs(xi) + std::abs(di) + std::abs(dj);

      worst[0] = std::max(worst[0], rel(hs.bar(i, j), 0.25 * s * (eta - xi), scale));
      const double hat = h[i] / (2 * h[j]) * di + h[j] / (2 * h[i]) * dj - 0.5 * s * xi;
      worst[1] = std::max(worst[1], rel(hs.hat(i, j), hat, scale));
      const double tilde = -h[i] / (2 * h[j]) * di - h[j] / (2 * h[i]) * dj + 0.5 * s * eta;
      worst[2] = std::max(worst[2], rel(hs.tilde(i, j), tilde, scale));

      const DiscreteGradients gr = gradients(u, f);
      for (int a = 0; a < 2; ++a) {
        const double lhs = gr.forward[a] - gr.backward[a];
        const double rhs = h[a] * second_diff(u, f, a, Width::H);
        worst[3] = std::max(worst[3], rel(lhs, rhs, std::abs(gr.forward[a]) + std::abs(gr.backward[a])));
      }

      // Mixed moment: [tilde - hat]_ij = (h_i h_j / 2) delta^2_i delta^2_j U.
      const GridSpec& gs = *g;
      auto at = [&](int oi, int oj) {
        MultiIndex m = gs.unflatten(f);
        m[0] += oi;
        m[1] += oj;
        return u.at(m);
      };
      double dd = 0.0;
      const double w[3] = {1.0, -2.0, 1.0};
      for (int a = -1; a <= 1; ++a)
        for (int b = -1; b <= 1; ++b) dd += w[a + 1] * w[b + 1] * at(a, b);
      dd /= h[0] * h[0] * h[1] * h[1];
      const Matrix md = moment_difference(u, f);
      worst[4] = std::max(worst[4], rel(md(0, 1), 0.5 * h[0] * h[1] * dd, std::abs(md(0, 1)) + 0.5 * h[0] * h[1] * std::abs(dd)));

      // Diagonal moment: 2 (delta^2_2h - delta^2_h) U = (1/2)(d2 U_{-e} - 2 d2 U + d2 U_{+e}).
      auto neighbor = [&](int a, int step) {
        MultiIndex m = gs.unflatten(f);
        m[static_cast<std::size_t>(a)] += step;
        return gs.flat(m);
      };
      for (int a = 0; a < 2; ++a) {
        const double lhs = 2.0 * (second_diff(u, f, a, Width::TwoH) - second_diff(u, f, a, Width::H));
        const double rhs = 0.5 * (second_diff(u, neighbor(a, -1), a, Width::H) - 2.0 * second_diff(u, f, a, Width::H) +
                                  second_diff(u, neighbor(a, 1), a, Width::H));
        worst[5] = std::max(worst[5], rel(lhs, rhs, std::abs(lhs) + 4.0 * std::abs(second_diff(u, f, a, Width::H))));
        worst[5] = std::max(worst[5], rel(md(a, a), lhs, std::abs(lhs) + 1.0));
      }
    }
  }
  const char* names[] = {"bar", "hat", "tilde", "viscosity", "moment_ij", "moment_ii"};
  for (std::size_t k = 0; k < worst.size(); ++k) {
    out.detail << " " << names[k] << "=" << sci(worst[k]);
    out.require(worst[k] <= kIdentityTol, std::string(names[k]) + " identity to 1e-12");
  }
}

void criterion6(Outcome& out) {
  const ManufacturedProblem t1 = make_test1();
  const EllipticityData& e = t1.op.ellipticity();
  const SchemeParams params{0.5 * e.K_ss + 0.1, 0.5 * e.K_s + 0.1};
  std::mt19937_64 rng(99);
  const GridPtr g = make_grid(t1.domain, {11, 11});
  const auto& nodes = g->interior_nodes();
  std::uniform_int_distribution<std::size_t> pick(0, nodes.size() - 1);
  std::uniform_int_distribution<int> kind(0, 4);
  std::uniform_int_distribution<int> axis(0, 1);
  std::uniform_real_distribution<double> log_eps(-6.0, -1.0);
  int wrong = 0;
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    GridFunction u = testing::random_extended(g, rng, -2.0, 2.0);
    const Slot slot{static_cast<SlotKind>(kind(rng)), axis(rng), axis(rng)};
    const double eps = std::pow(10.0, log_eps(rng));
    const double v = monotonicity_probe(u, nodes[pick(rng)], params, t1.op, slot, eps);
    const double signed_v = required_probe_sign(slot.kind) * v;
    worst = std::min(worst, signed_v);
    if (signed_v < -kProbeTol) ++wrong;
  }
  out.detail << " gamma=" << fix(params.gamma) << " beta=" << fix(params.beta) << " wrong signs " << wrong
             << "/200, most negative signed probe " << sci(worst);
  out.require(wrong == 0, "all probe signs correct");
}

void criterion7(Outcome& out) {
  const ManufacturedProblem t1 = make_test1();
  const GridPtr g = make_grid(t1.domain, {17, 17});
  const SchemeParams params{4.0, 0.0};
  SolverConfig euler;
  euler.method = SolverConfig::Method::Euler;
  euler.tol_update = 1e-12;
  const SolveReport a = solve(GridFunction(g), euler, params, t1.op, t1.boundary_g);
  SolverConfig newton;
  newton.method = SolverConfig::Method::Newton;
  const SolveReport b = solve(GridFunction(g), newton, params, t1.op, t1.boundary_g);

  double max_ratio = 0.0;
  for (std::size_t k = 10; k < a.contraction_estimates.size(); ++k)
    max_ratio = std::max(max_ratio, a.contraction_estimates[k]);
  double diff = 0.0;
  for (std::size_t f = 0; f < g->extended_count(); ++f)
    if (g->is_mesh_node(f)) diff = std::max(diff, std::abs(a.solution.at(f) - b.solution.at(f)));
  out.detail << " rho=" << sci(a.rho) << " euler iterations " << a.iterations << " residual "
             << sci(a.final_residual) << ", max ratio after 10th " << sci(max_ratio) << ", |euler - newton| " << sci(diff);
  out.require(max_ratio < 1.0, "update ratio < 1 after the tenth iteration");
  out.require(b.converged, "newton converged");
  out.require(diff <= kEulerNewtonTol, "euler matches newton to 1e-6");
}

void criterion8(Outcome& out) {
  const ManufacturedProblem p = make_test1();
  RunConfig cfg;
  cfg.problem = "test1";
  cfg.finest_unlock = true;
  for (double h : kTable1.h) {
    const int j = grid_size_from_diagonal_h(h, 1.0, 2);
    cfg.grid_sizes.push_back({j, j});
  }
  const auto rows = run_convergence(cfg);
  const StabilityDiagnostics& c = rows.front().diagnostics;
  double worst = 0.0;
  for (const auto& r : rows) {
    const StabilityDiagnostics& s = r.diagnostics;
    std::vector<double> ratios{s.weighted_l2 / c.weighted_l2, s.linf / c.linf};
    for (std::size_t i = 0; i < s.h2_diag.size(); ++i) ratios.push_back(s.h2_diag[i] / c.h2_diag[i]);
    for (double q : ratios) worst = std::max(worst, q);
    out.detail << " J=" << r.sizes[0] << " l2=" << sci(s.weighted_l2) << " d2x=" << sci(s.h2_diag[0])
               << " d2y=" << sci(s.h2_diag[1]) << " linf=" << sci(s.linf);
    out.require(r.converged, "solver converged on J=" + std::to_string(r.sizes[0]));
  }
  out.detail << "; worst ratio to coarsest " << fix(worst);
  out.require(worst <= kStabilityFactor, "diagnostics within 10x of the coarsest grid");
}

void criterion9(Outcome& out) {
  struct Run {
    const char* name;
    LemmaTally tally;
  };
  const Run runs[] = {
      {"orthogonal similarity", run_lemma_a1(100, 101)},
      {"tau bound with F = I", run_corollary_a1(100, 102, true)},
      {"sigma norm bound", run_lemma_a3(100, 103)},
      {"tau bound", run_corollary_a1(100, 104, false)},
  };
  for (const Run& r : runs) {
    out.detail << " " << r.name << ": " << r.tally.held << " held, " << r.tally.failed << " failed, "
               << r.tally.skipped << " skipped;";
    out.require(r.tally.tested() >= 100, std::string(r.name) + " has 100 filtered instances");
    out.require(r.tally.failed == 0, std::string(r.name) + " has no failures");
  }

  double factor_err = 0.0;
  std::vector<double> scaled;
  for (int j : {5, 9}) {
    const GridSpec g = build_grid(DomainBox::unit(2), {j, j});
    const double h0 = g.spacing(0);
    const double h1 = g.spacing(1);
    const Matrix n0 = build_operator_matrix(g, {OperatorKind::NegSecondDiffH, 0, 0}).entries;
    const Matrix n1 = build_operator_matrix(g, {OperatorKind::NegSecondDiffH, 1, 0}).entries;
    const Matrix m01 = build_operator_matrix(g, {OperatorKind::MomentMixed, 0, 1}).entries;
    const Matrix a00 = build_operator_matrix(g, {OperatorKind::MomentDiag, 0, 0}).entries;
    const double scale = m01.cwiseAbs().maxCoeff();
    factor_err = std::max(factor_err, (m01 - 0.5 * h0 * h1 * n0 * n1).cwiseAbs().maxCoeff() / scale);
    factor_err = std::max(factor_err, (m01 - 0.5 * h0 * h1 * n1 * n0).cwiseAbs().maxCoeff() / scale);
    factor_err = std::max(factor_err, (a00 - 0.5 * h0 * h0 * n0 * n0).cwiseAbs().maxCoeff() /
                                          a00.cwiseAbs().maxCoeff());
    scaled.push_back(check_spd(a00).min_eig / (h0 * h0));

    const SpdReport tilde = check_spd(build_operator_matrix(g, {OperatorKind::TildeMixed, 0, 1}).entries);
    const SpdReport hat = check_spd(build_operator_matrix(g, {OperatorKind::NegHatMixed, 0, 1}).entries);
    out.detail << " [info " << j << "x" << j << ": Atilde_12 min eig " << sci(tilde.min_eig)
               << ", Ahat_12 min eig " << sci(hat.min_eig) << "]";
  }
  const double ratio = scaled[0] / scaled[1];
  out.detail << " factorization error " << sci(factor_err) << ", A_11 min eig/h^2 ratio " << fix(ratio);
  out.require(factor_err <= kFactorTol, "moment factorization to 1e-12");
  out.require(std::abs(ratio - 1.0) <= kScalingTol, "h^2 scaling within 20%");
}

void criterion10(Outcome& out) {
  std::mt19937_64 rng(10);
  double worst = 0.0;
  const std::vector<std::pair<DomainBox, std::vector<int>>> grids = {
      {DomainBox::unit(2), {9, 9}}, {DomainBox{{0, 0}, {1, 2}}, {7, 12}}, {DomainBox{{-1, -1}, {1, 1}}, {5, 6}}};
  for (int trial = 0; trial < 100; ++trial) {
    const auto& [box, sizes] = grids[static_cast<std::size_t>(trial) % grids.size()];
    const GridPtr g = make_grid(box, sizes);
    std::uniform_real_distribution<double> dist(-1, 1);
    GridFunction u(g);
    for (std::size_t f = 0; f < g->extended_count(); ++f)
      if (g->is_mesh_node(f)) u.set(f, dist(rng));
    fill_ghosts(u);
    for (std::size_t b : g->aux_nodes()) {
      double sum = 0.0;
      double largest = 0.0;
      for (int i = 0; i < 2; ++i) {
        const double t = second_diff(u, b, i, Width::H);
        sum += t;
        largest = std::max(largest, std::abs(t));
      }
      worst = std::max(worst, std::abs(sum) / std::max(1.0, largest));
    }
  }
  double harmonic = 0.0;
  auto v = [](const Point& x) { return 1.0 + 2.0 * x[0] - x[1] + 3.0 * (x[0] * x[0] - x[1] * x[1]) + 1.5 * x[0] * x[1]; };
  for (const auto& [box, sizes] : grids) {
    const GridPtr g = make_grid(box, sizes);
    GridFunction u = GridFunction::sample(g, v);
    fill_ghosts(u);
    for (const GhostLink& l : g->ghost_links())
      harmonic = std::max(harmonic, testing::rel_err(u.at(l.ghost), v(g->coord_flat(l.ghost))));
  }
  out.detail << " closure residual " << sci(worst) << ", harmonic ghost error " << sci(harmonic);
  out.require(worst <= kGhostTol, "closure to 1e-12");
  out.require(harmonic <= kGhostTol, "harmonic ghosts to 1e-12");
}

const std::array<std::function<void(Outcome&)>, 10> kCriteria = {
    criterion1, criterion2, criterion3, criterion4, criterion5,
    criterion6, criterion7, criterion8, criterion9, criterion10};

bool run(int n) {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    kCriteria[static_cast<std::size_t>(n - 1)](out);
  } catch (const std::exception& e) {
    out.require(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("criterion %d: %s (%.1fs)%s\n", n, out.pass ? "PASS" : "FAIL", secs, out.detail.str().c_str());
  std::fflush(stdout);
  return out.pass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  int criterion = 0;
  app.add_option("--criterion", criterion, "Criterion to run (1-10); all when omitted")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  bool ok = true;
  if (criterion > 0) {
    ok = run(criterion);
  } else {
    for (int n = 1; n <= 10; ++n) ok = run(n) && ok;
  }
  return ok ? 0 : 1;
}
