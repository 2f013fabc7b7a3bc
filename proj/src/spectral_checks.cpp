#include "nsfd/spectral_checks.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "nsfd/scheme.hpp"
#include "nsfd/stencil.hpp"

namespace nsfd {

namespace {

struct Term {
  int oi;  // offset along label.i
  int oj;  // offset along label.j (mixed kinds only)
  double c;
};

bool is_mixed(OperatorKind k) {
  return k == OperatorKind::MomentMixed || k == OperatorKind::TildeMixed ||
         k == OperatorKind::NegHatMixed;
}

void check_label(const GridSpec& grid, const OperatorLabel& label) {
  const int d = static_cast<int>(grid.dim());
  if (label.i < 0 || label.i >= d) throw ContractError("operator axis out of range");
  if (is_mixed(label.kind) && (label.j < 0 || label.j >= d || label.j == label.i))
    throw ContractError("mixed operator needs two distinct axes");
}

std::vector<Term> stencil_terms(const GridSpec& grid, const OperatorLabel& label) {
  const double hi = grid.spacing(label.i);
  const double h2 = hi * hi;
  switch (label.kind) {
    case OperatorKind::NegSecondDiff2h:
      return {{-2, 0, -0.25 / h2}, {0, 0, 0.5 / h2}, {2, 0, -0.25 / h2}};
    case OperatorKind::SecondDiff2h:
      return {{-2, 0, 0.25 / h2}, {0, 0, -0.5 / h2}, {2, 0, 0.25 / h2}};
    case OperatorKind::NegSecondDiffH:
      return {{-1, 0, -1.0 / h2}, {0, 0, 2.0 / h2}, {1, 0, -1.0 / h2}};
    case OperatorKind::MomentDiag:
      return {{-2, 0, 0.5 / h2}, {-1, 0, -2.0 / h2}, {0, 0, 3.0 / h2},
              {1, 0, -2.0 / h2}, {2, 0, 0.5 / h2}};
    default: break;
  }
  const double s = 1.0 / (2.0 * hi * grid.spacing(label.j));
  switch (label.kind) {
    case OperatorKind::TildeMixed:
      return {{1, 1, s},   {-1, -1, s}, {1, 0, -s}, {-1, 0, -s},
              {0, 1, -s},  {0, -1, -s}, {0, 0, 2 * s}};
    case OperatorKind::NegHatMixed:
      return {{1, -1, s},  {-1, 1, s},  {1, 0, -s}, {-1, 0, -s},
              {0, 1, -s},  {0, -1, -s}, {0, 0, 2 * s}};
    case OperatorKind::MomentMixed:
      return {{1, 1, s},       {-1, -1, s},     {1, -1, s},      {-1, 1, s},
              {1, 0, -2 * s},  {-1, 0, -2 * s}, {0, 1, -2 * s},  {0, -1, -2 * s},
              {0, 0, 4 * s}};
    default: break;
  }
  return {};
}

}  // namespace

std::string OperatorLabel::name() const {
  const std::string si = std::to_string(i + 1);
  const std::string sj = std::to_string(j + 1);
  switch (kind) {
    case OperatorKind::NegSecondDiff2h: return "A_" + si;
    case OperatorKind::NegSecondDiffH: return "-d2h_" + si;
    case OperatorKind::SecondDiff2h: return "D2_2h_" + si;
    case OperatorKind::MomentDiag: return "A_" + si + si;
    case OperatorKind::MomentMixed: return "M_" + si + sj;
    case OperatorKind::TildeMixed: return "Atilde_" + si + sj;
    case OperatorKind::NegHatMixed: return "Ahat_" + si + sj;
  }
  return "?";
}

OperatorMatrix build_operator_matrix(const GridSpec& grid, OperatorLabel label) {
  check_label(grid, label);
  const std::size_t n = grid.interior_count();
  if (n > kMaxDenseInterior)
    throw InvalidGridError("grid too large for a dense operator matrix (" + std::to_string(n) +
                           " interior nodes, limit " + std::to_string(kMaxDenseInterior) + ")");
  std::unordered_map<std::size_t, std::size_t> mirror;
  for (const GhostLink& link : grid.ghost_links()) mirror.emplace(link.ghost, link.inner);

  const auto terms = stencil_terms(grid, label);
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  const auto& nodes = grid.interior_nodes();
  for (std::size_t row = 0; row < n; ++row) {
    for (const Term& t : terms) {
      std::ptrdiff_t flat = static_cast<std::ptrdiff_t>(nodes[row]) + t.oi * grid.stride(label.i);
      if (t.oj != 0) flat += t.oj * grid.stride(label.j);
      const auto f = static_cast<std::size_t>(flat);
      double c = t.c;
      std::size_t target = f;
      switch (grid.classify_flat(f)) {
        case NodeClass::Interior: break;
        case NodeClass::Boundary:
        case NodeClass::BoundaryAux: continue;
        case NodeClass::Ghost:
          target = mirror.at(f);
          c = -c;
          break;
        case NodeClass::ExcludedGhost:
          throw TopologyError("operator stencil reaches an excluded ghost node");
      }
      const std::ptrdiff_t col = grid.interior_position(target);
      if (col < 0) continue;  // mirror node on the boundary (J = 3)
      m(static_cast<Eigen::Index>(row), col) += c;
    }
  }
  return {label, std::move(m)};
}

Vector apply_pointwise(const GridPtr& grid, OperatorLabel label, const Vector& v) {
  check_label(*grid, label);
  GridFunction u(grid);
  u.set_interior(v);
  fill_ghosts(u);
  const auto& nodes = grid->interior_nodes();
  Vector out(static_cast<Eigen::Index>(nodes.size()));
  const int i = label.i;
  const int j = label.j;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const std::size_t f = nodes[k];
    double r = 0.0;
    switch (label.kind) {
      case OperatorKind::NegSecondDiff2h: r = -second_diff(u, f, i, Width::TwoH); break;
      case OperatorKind::NegSecondDiffH: r = -second_diff(u, f, i, Width::H); break;
      case OperatorKind::SecondDiff2h: r = second_diff(u, f, i, Width::TwoH); break;
      case OperatorKind::MomentDiag: r = tilde_diagonal(u, f, i) - second_diff(u, f, i, Width::H); break;
      case OperatorKind::MomentMixed:
        r = mixed_second(u, f, i, j, MixedFlavor::Tilde) - mixed_second(u, f, i, j, MixedFlavor::Hat);
        break;
      case OperatorKind::TildeMixed: r = mixed_second(u, f, i, j, MixedFlavor::Tilde); break;
      case OperatorKind::NegHatMixed: r = -mixed_second(u, f, i, j, MixedFlavor::Hat); break;
    }
    out[static_cast<Eigen::Index>(k)] = r;
  }
  return out;
}

SpdReport check_spd(const Matrix& m) {
  SpdReport rep;
  if (m.rows() != m.cols()) return rep;
  rep.symmetric = m == m.transpose();
  if (m.size() == 0) return rep;
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  rep.min_eig = es.eigenvalues().minCoeff();
  rep.max_eig = es.eigenvalues().maxCoeff();
  const double norm = es.eigenvalues().cwiseAbs().maxCoeff();
  rep.is_spd = rep.symmetric && rep.min_eig > 0.0;
  rep.psd_boundary = rep.symmetric && norm > 0.0 && rep.min_eig <= 0.0 && rep.min_eig > -1e-10 * norm;
  return rep;
}

const char* to_string(LemmaOutcome outcome) {
  switch (outcome) {
    case LemmaOutcome::Held: return "held";
    case LemmaOutcome::Failed: return "failed";
    case LemmaOutcome::Skipped: return "skipped";
  }
  return "?";
}

namespace {

bool spd(const Matrix& m) {
  // Symmetry up to roundoff here: the inputs are products of dense matrices.
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) return false;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() > 0.0;
}

double lambda_max_sym(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

// Upper-triangular R with F = R^T R.
std::optional<Matrix> upper_factor(const Matrix& f) {
  Eigen::LLT<Matrix> llt(f);
  if (llt.info() != Eigen::Success) return std::nullopt;
  return Matrix(llt.matrixU());
}

}  // namespace

LemmaOutcome lemma_a1(const Matrix& a, const Matrix& b, const Matrix& q) {
  const auto n = a.rows();
  if (b.rows() != n || q.rows() != n) throw ContractError("lemma_a1 needs square matrices of one size");
  const bool orthogonal = (q.transpose() * q - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-10;
  if (!spd(a) || !spd(b) || !orthogonal || !spd(a - q.transpose() * b * q)) return LemmaOutcome::Skipped;
  return spd(a - b) ? LemmaOutcome::Held : LemmaOutcome::Failed;
}

LemmaOutcome lemma_a3(const Matrix& a, const Matrix& f, double sigma) {
  const auto n = a.rows();
  if (f.rows() != n) throw ContractError("lemma_a3 needs square matrices of one size");
  if (!spd(a) || !spd(f)) return LemmaOutcome::Skipped;
  const auto r = upper_factor(f);
  if (!r) return LemmaOutcome::Skipped;
  const Matrix rar = *r * a * r->transpose();
  if (!(sigma > 0.0) || !spd(sigma * Matrix::Identity(n, n) - rar)) return LemmaOutcome::Skipped;
  Eigen::JacobiSVD<Matrix> svd(sigma * Matrix::Identity(n, n) - f * a);
  const double norm2 = svd.singularValues()[0];
  return norm2 <= sigma * (1.0 + 1e-12) ? LemmaOutcome::Held : LemmaOutcome::Failed;
}

TauScan corollary_a1(const Matrix& a, const Matrix& b, const Matrix& f, int n_tau,
                     std::mt19937_64& rng, int n_x) {
  const auto n = a.rows();
  if (b.rows() != n || f.rows() != n) throw ContractError("corollary_a1 needs square matrices of one size");
  if (n_tau < 1) throw ContractError("corollary_a1 needs n_tau >= 1");
  const Matrix fa = f * a;

  // Scale so the first scanned tau already moves B by about its own size.
  Eigen::SelfAdjointEigenSolver<Matrix> eb(b, Eigen::EigenvaluesOnly);
  const double fa_norm = Eigen::JacobiSVD<Matrix>(fa).singularValues()[0];
  TauScan scan;
  scan.tau_max = fa_norm > 0.0 ? 2.0 * eb.eigenvalues().maxCoeff() / fa_norm : 1.0;

  Matrix xs(n, n_x + n);
  std::normal_distribution<double> normal;
  for (int k = 0; k < n_x; ++k) {
    Vector x(n);
    for (Eigen::Index r = 0; r < n; ++r) x[r] = normal(rng);
    xs.col(k) = x.normalized();
  }
  const Matrix bfa = b * fa;
  Eigen::SelfAdjointEigenSolver<Matrix> worst(0.5 * (bfa + bfa.transpose()));
  xs.rightCols(n) = worst.eigenvectors();

  const Matrix bx = b * xs;
  const Matrix fax = fa * xs;
  std::vector<bool> held(static_cast<std::size_t>(n_tau));
  double tau = scan.tau_max;
  for (int k = 0; k < n_tau; ++k, tau *= 0.5) {
    bool ok = true;
    for (Eigen::Index c = 0; c < xs.cols() && ok; ++c) {
      const double lhs = (bx.col(c) - tau * fax.col(c)).norm();
      const double rhs = bx.col(c).norm();
      ok = lhs <= rhs * (1.0 + 1e-13);
    }
    held[static_cast<std::size_t>(k)] = ok;
    scan.tau_min = tau;
  }
  // Walk up from the smallest tau while the bound keeps holding.
  tau = scan.tau_min;
  for (int k = n_tau - 1; k >= 0 && held[static_cast<std::size_t>(k)]; --k, tau *= 2.0)
    scan.largest_tau = tau;
  return scan;
}

Matrix RandomMatrices::gaussian(Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal;
  Matrix g(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) g(r, c) = normal(rng_);
  return g;
}

Matrix RandomMatrices::spd(Eigen::Index n) {
  const Matrix g = gaussian(n, n);
  return g.transpose() * g + 1e-3 * Matrix::Identity(n, n);
}

Matrix RandomMatrices::orthogonal(Eigen::Index n) {
  Eigen::HouseholderQR<Matrix> qr(gaussian(n, n));
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < n; ++k)
    if (r(k, k) < 0.0) q.col(k) = -q.col(k);
  return q;
}

Vector RandomMatrices::unit_vector(Eigen::Index n) { return gaussian(n, 1).col(0).normalized(); }

int RandomMatrices::uniform_int(int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng_);
}

double RandomMatrices::uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng_);
}

namespace {

void tally(LemmaTally& t, LemmaOutcome o) {
  switch (o) {
    case LemmaOutcome::Held: ++t.held; break;
    case LemmaOutcome::Failed: ++t.failed; break;
    case LemmaOutcome::Skipped: ++t.skipped; break;
  }
}

}  // namespace

LemmaTally run_lemma_a1(int instances, std::uint64_t seed, int n_min, int n_max) {
  RandomMatrices rm(seed);
  LemmaTally t;
  for (int draw = 0; t.tested() < instances && draw < 20 * instances; ++draw) {
    const int n = rm.uniform_int(n_min, n_max);
    const Matrix b = rm.spd(n);
    const Matrix q = rm.orthogonal(n);
    Matrix p = rm.spd(n);
    p *= 0.1 * lambda_max_sym(b) / lambda_max_sym(p);
    const Matrix a = q.transpose() * b * q + p;
    tally(t, lemma_a1(a, b, q));
  }
  return t;
}

LemmaTally run_lemma_a3(int instances, std::uint64_t seed, double sigma_factor, int n_min, int n_max) {
  RandomMatrices rm(seed);
  LemmaTally t;
  for (int draw = 0; t.tested() < instances && draw < 20 * instances; ++draw) {
    const int n = rm.uniform_int(n_min, n_max);
    const Matrix a = rm.spd(n);
    const Matrix f = rm.spd(n);
    const auto r = upper_factor(f);
    if (!r) {
      ++t.skipped;
      continue;
    }
    const double sigma = sigma_factor * lambda_max_sym(*r * a * r->transpose());
    tally(t, lemma_a3(a, f, sigma));
  }
  return t;
}

LemmaTally run_corollary_a1(int instances, std::uint64_t seed, bool identity_f, int n_min, int n_max) {
  RandomMatrices rm(seed);
  LemmaTally t;
  for (int i = 0; i < instances; ++i) {
    const int n = rm.uniform_int(n_min, n_max);
    const Matrix a = rm.spd(n);
    const Matrix b = rm.spd(n);
    const Matrix f = identity_f ? Matrix(Matrix::Identity(n, n)) : rm.spd(n);
    const TauScan scan = corollary_a1(a, b, f, 30, rm.engine());
    if (scan.largest_tau) ++t.held;
    else ++t.failed;
  }
  return t;
}

}  // namespace nsfd
