#include "nsfd/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SparseLU>

#include "nsfd/stencil.hpp"

namespace nsfd {

namespace {

double max_abs(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

bool all_finite(const Vector& v) { return v.allFinite(); }

// Stencil reach of the scheme in grid steps; ghost closure stays within it
// because the ghost value only involves the mirror interior node and fixed
// boundary data.
constexpr int kReach = 2;
constexpr int kColors = 2 * kReach + 1;

}  // namespace

void SolverConfig::validate() const {
  if (rho && !(*rho > 0.0)) throw ConfigError("rho must be positive");
  if (!(tol_residual > 0.0) || !(tol_update > 0.0)) throw ConfigError("tolerances must be positive");
  if (max_iters < 1) throw ConfigError("max_iters must be at least 1");
  if (!(damping > 0.0 && damping <= 1.0)) throw ConfigError("damping must lie in (0, 1]");
  if (divergence_window < 1) throw ConfigError("divergence_window must be at least 1");
  if (max_halvings < 0) throw ConfigError("max_halvings must be nonnegative");
}

GridFunction euler_step(const GridFunction& u, double rho, const SchemeParams& params,
                        const PdeOperator& op, const BoundaryData& g) {
  if (rho < 0.0) throw ContractError("rho must be nonnegative");
  const Residual r = residual(u, params, op, g);
  const GridSpec& grid = u.grid();
  GridFunction out(u.grid_ptr());
  for (std::size_t f : grid.interior_nodes()) {
    const double v = r.values.at(f);
    if (!std::isfinite(v)) throw DivergenceError("non-finite residual in euler_step");
    out.set(f, u.at(f) - rho * v);
  }
  for (std::size_t b : grid.boundary_nodes()) out.set(b, g(grid.coord_flat(b)));
  fill_ghosts(out);
  return out;
}

double auto_rho(const SchemeParams& params, const PdeOperator& op, const GridSpec& grid) {
  const EllipticityData& e = op.ellipticity();
  const int d = static_cast<int>(grid.dim());
  double denom = e.K0;
  for (int i = 0; i < d; ++i) {
    const double hi = grid.spacing(i);
    denom += e.K_ss * 4.0 / (hi * hi);
    denom += params.beta * 2.0 / hi;
    for (int j = 0; j < d; ++j) denom += params.gamma * 8.0 / (hi * grid.spacing(j));
  }
  return denom > 0.0 ? 1.0 / denom : 1.0;
}

SolveReport solve_fixed_point(const GridFunction& u0, const SolverConfig& cfg,
                              const SchemeParams& params, const PdeOperator& op,
                              const BoundaryData& g) {
  cfg.validate();
  const SchemeAssembler assembler(u0.grid_ptr(), params, op, g);
  const bool auto_mode = !cfg.rho.has_value();
  double rho = auto_mode ? auto_rho(params, op, u0.grid()) : *cfg.rho;

  Vector x = u0.interior_vector();
  Vector r = assembler.evaluate(x);
  if (!all_finite(r)) throw DivergenceError("non-finite residual at the initial guess");

  SolveReport rep{GridFunction(u0.grid_ptr()), 0, max_abs(r), 0.0, {}, false, rho};
  double prev_update = 0.0;
  int halvings = 0;
  int streak = 0;
  while (rep.iterations < cfg.max_iters) {
    if (max_abs(r) <= cfg.tol_residual) break;
    const Vector step = -rho * r;
    const double update = step.norm();
    x += step;
    ++rep.iterations;
    r = assembler.evaluate(x);
    if (!all_finite(r)) throw DivergenceError("non-finite residual during pseudo-time iteration");
    rep.final_update_norm = update;

    if (prev_update > 0.0) {
      const double ratio = update / prev_update;
      rep.contraction_estimates.push_back(ratio);
      if (ratio > 1.0) {
        if (auto_mode && halvings < cfg.max_halvings) {
          rho *= 0.5;
          ++halvings;
          streak = 0;
        } else if (++streak >= cfg.divergence_window) {
          rep.solution = assembler.assemble(x);
          rep.final_residual = max_abs(r);
          rep.rho = rho;
          throw NonconvergenceError("update ratio above 1 for " + std::to_string(streak) +
                                        " consecutive iterations",
                                    std::move(rep));
        }
      } else {
        streak = 0;
      }
    }
    prev_update = update;
    if (update <= cfg.tol_update) break;
  }
  rep.final_residual = max_abs(r);
  rep.converged = rep.final_residual <= cfg.tol_residual;
  rep.solution = assembler.assemble(x);
  rep.rho = rho;
  return rep;
}

Eigen::SparseMatrix<double> scheme_jacobian(const SchemeAssembler& assembler, const Vector& interior,
                                            const Vector& base_residual) {
  const GridSpec& grid = assembler.grid();
  const int d = static_cast<int>(grid.dim());
  const auto& nodes = grid.interior_nodes();
  const auto n = static_cast<Eigen::Index>(nodes.size());

  // Nodes whose components agree mod 5 on every axis never share a row of the
  // Jacobian, since each row only reaches +-2 steps per axis.
  int n_colors = 1;
  for (int i = 0; i < d; ++i) n_colors *= kColors;
  std::vector<std::vector<Eigen::Index>> colors(static_cast<std::size_t>(n_colors));
  for (Eigen::Index k = 0; k < n; ++k) {
    int c = 0;
    for (int i = d - 1; i >= 0; --i) c = c * kColors + grid.component(nodes[k], i) % kColors;
    colors[static_cast<std::size_t>(c)].push_back(k);
  }

  int box = 1;
  for (int i = 0; i < d; ++i) box *= kColors;

  // Differencing with the active operator pieces held fixed keeps every row
  // the derivative of one smooth piece, even where pieces tie.
  const std::vector<int> branches = assembler.select_branches(assembler.assemble(interior));

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(box));
  const double sqrt_eps = std::sqrt(std::numeric_limits<double>::epsilon());
  Vector eps(n);
  for (const auto& group : colors) {
    if (group.empty()) continue;
    Vector xp = interior;
    for (Eigen::Index k : group) {
      eps[k] = sqrt_eps * std::max(1.0, std::abs(interior[k]));
      xp[k] += eps[k];
    }
    const Vector rp = assembler.evaluate(assembler.assemble(xp), branches);
    for (Eigen::Index k : group) {
      const std::size_t col_flat = nodes[static_cast<std::size_t>(k)];
      for (int b = 0; b < box; ++b) {
        int rem = b;
        bool inside = true;
        std::ptrdiff_t flat = static_cast<std::ptrdiff_t>(col_flat);
        for (int i = 0; i < d; ++i) {
          const int o = rem % kColors - kReach;
          rem /= kColors;
          const int c = grid.component(col_flat, i) + o;
          if (c < 2 || c > grid.sizes()[i] - 1) {
            inside = false;
            break;
          }
          flat += o * grid.stride(i);
        }
        if (!inside) continue;
        const std::ptrdiff_t row = grid.interior_position(static_cast<std::size_t>(flat));
        const double v = (rp[row] - base_residual[row]) / eps[k];
        if (v != 0.0 || row == k) triplets.emplace_back(row, k, v);
      }
    }
  }
  Eigen::SparseMatrix<double> jac(n, n);
  jac.setFromTriplets(triplets.begin(), triplets.end());
  return jac;
}

SolveReport solve_newton(const GridFunction& u0, const SolverConfig& cfg, const SchemeParams& params,
                         const PdeOperator& op, const BoundaryData& g) {
  cfg.validate();
  if (cfg.method == SolverConfig::Method::Euler) throw ConfigError("solve_newton needs a Newton method");
  const SchemeAssembler assembler(u0.grid_ptr(), params, op, g);
  const bool fallback = cfg.method == SolverConfig::Method::NewtonWithEulerFallback;

  Vector x = u0.interior_vector();
  Vector r = assembler.evaluate(x);
  if (!all_finite(r)) throw DivergenceError("non-finite residual at the initial guess");

  SolveReport rep{GridFunction(u0.grid_ptr()), 0, max_abs(r), 0.0, {}, false, 0.0};
  double prev_update = 0.0;

  auto fall_back = [&](const char* why) {
    if (!fallback) throw SolverError(why);
    GridFunction start = assembler.assemble(x);
    SolveReport tail = solve_fixed_point(start, cfg, params, op, g);
    tail.iterations += rep.iterations;
    rep.contraction_estimates.insert(rep.contraction_estimates.end(),
                                     tail.contraction_estimates.begin(),
                                     tail.contraction_estimates.end());
    tail.contraction_estimates = std::move(rep.contraction_estimates);
    return tail;
  };

  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  bool pattern_ready = false;
  while (rep.iterations < cfg.max_iters && max_abs(r) > cfg.tol_residual) {
    const Eigen::SparseMatrix<double> jac = scheme_jacobian(assembler, x, r);
    if (!pattern_ready) {
      lu.analyzePattern(jac);
      pattern_ready = true;
    }
    lu.factorize(jac);
    if (lu.info() != Eigen::Success) return fall_back("singular Jacobian in Newton iteration");
    const Vector dx = lu.solve(-r);
    if (lu.info() != Eigen::Success || !all_finite(dx))
      return fall_back("Jacobian solve failed in Newton iteration");

    // Halve the step until the l2 residual decreases.
    const double norm0 = r.norm();
    double t = cfg.damping;
    bool accepted = false;
    Vector x_try;
    Vector r_try;
    for (int k = 0; k < 40; ++k, t *= 0.5) {
      x_try = x + t * dx;
      r_try = assembler.evaluate(x_try);
      if (all_finite(r_try) && r_try.norm() < norm0) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;  // stagnated, typically at the roundoff floor
    const double update = (x_try - x).norm();
    x = std::move(x_try);
    r = std::move(r_try);
    ++rep.iterations;
    rep.final_update_norm = update;
    if (prev_update > 0.0) rep.contraction_estimates.push_back(update / prev_update);
    prev_update = update;
    if (update == 0.0) break;
  }
  rep.final_residual = max_abs(r);
  rep.converged = rep.final_residual <= cfg.tol_residual;
  rep.solution = assembler.assemble(x);
  return rep;
}

SolveReport solve(const GridFunction& u0, const SolverConfig& cfg, const SchemeParams& params,
                  const PdeOperator& op, const BoundaryData& g) {
  if (cfg.method == SolverConfig::Method::Euler) return solve_fixed_point(u0, cfg, params, op, g);
  return solve_newton(u0, cfg, params, op, g);
}

StabilityDiagnostics stability_diagnostics(const GridFunction& u) {
  const GridSpec& grid = u.grid();
  const int d = static_cast<int>(grid.dim());
  double weight = 1.0;
  for (int i = 0; i < d; ++i) weight *= std::sqrt(grid.spacing(i));

  StabilityDiagnostics out;
  out.h2_diag.assign(static_cast<std::size_t>(d), 0.0);
  double sum = 0.0;
  for (std::size_t f : grid.interior_nodes()) {
    const double v = u.at(f);
    sum += v * v;
    for (int i = 0; i < d; ++i) {
      const double s = second_diff(u, f, i, Width::TwoH);
      out.h2_diag[static_cast<std::size_t>(i)] += s * s;
    }
  }
  out.weighted_l2 = weight * std::sqrt(sum);
  for (double& s : out.h2_diag) s = weight * std::sqrt(s);
  for (std::size_t f = 0; f < grid.extended_count(); ++f)
    if (grid.is_mesh_node(f)) out.linf = std::max(out.linf, std::abs(u.at(f)));
  return out;
}

}  // namespace nsfd
