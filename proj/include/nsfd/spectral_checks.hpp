#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>

#include "nsfd/grid.hpp"

namespace nsfd {

/// Difference operators that get a dense matrix representation. Kinds with a
/// single axis use label.i; the mixed kinds use i != j.
enum class OperatorKind {
  NegSecondDiff2h,  // A_i = -delta^2_{x_i,2h_i}
  NegSecondDiffH,   // -delta^2_{x_i,h_i}
  SecondDiff2h,     // delta^2_{x_i,2h_i}
  MomentDiag,       // A_ii = [tilde - hat]_ii
  MomentMixed,      // M_ij = [tilde - hat]_ij
  TildeMixed,       // [tilde]_ij
  NegHatMixed,      // [-hat]_ij
};

struct OperatorLabel {
  OperatorKind kind = OperatorKind::NegSecondDiff2h;
  int i = 0;
  int j = 0;

  std::string name() const;
};

struct OperatorMatrix {
  OperatorLabel label;
  Matrix entries;

  Eigen::Index size() const { return entries.rows(); }
};

constexpr std::size_t kMaxDenseInterior = 400;

/// Matrix acting on interior-ordered vectors with zero Dirichlet data and the
/// ghost closure folded in (ghost = -mirror interior value). Assembled from
/// the stencil coefficients directly, not by probing the stencil functions.
/// Throws InvalidGridError when the grid has more than kMaxDenseInterior
/// interior nodes.
OperatorMatrix build_operator_matrix(const GridSpec& grid, OperatorLabel label);

/// The same operator evaluated pointwise with the stencil module on a grid
/// function built from v (zero boundary, ghosts closed).
Vector apply_pointwise(const GridPtr& grid, OperatorLabel label, const Vector& v);

struct SpdReport {
  bool symmetric = false;
  bool is_spd = false;
  /// Smallest eigenvalue is nonpositive but within roundoff of zero.
  bool psd_boundary = false;
  double min_eig = 0.0;
  double max_eig = 0.0;
};

/// Symmetry is checked exactly; eigenvalues of the symmetric part come from a
/// dense solve. PSD-boundary: -1e-10 ||M||_2 < min_eig <= 0.
SpdReport check_spd(const Matrix& m);

enum class LemmaOutcome { Held, Failed, Skipped };

const char* to_string(LemmaOutcome outcome);

/// A, B SPD, Q orthogonal and A - Q^T B Q SPD imply A - B SPD. Returns
/// Skipped when the hypotheses do not hold.
LemmaOutcome lemma_a1(const Matrix& a, const Matrix& b, const Matrix& q);

/// ||sigma I - F A||_2 <= sigma for sigma I > R A R^T, F = R^T R with R upper
/// triangular. Skipped when the hypotheses do not hold.
LemmaOutcome lemma_a3(const Matrix& a, const Matrix& f, double sigma);

struct TauScan {
  /// Largest scanned tau such that the bound held at it and at every smaller
  /// scanned tau; empty when it fails at the smallest.
  std::optional<double> largest_tau;
  double tau_max = 0.0;
  double tau_min = 0.0;
};

/// ||(B - tau F A) x||_2 <= ||B x||_2 scanned over tau = tau_max 2^{-k},
/// k < n_tau, with n_x random unit vectors plus the eigenvectors of the
/// symmetric part of B F A (the first-order worst directions).
TauScan corollary_a1(const Matrix& a, const Matrix& b, const Matrix& f, int n_tau,
                     std::mt19937_64& rng, int n_x = 200);

/// Seeded generators for the randomized lemma tests.
class RandomMatrices {
 public:
  explicit RandomMatrices(std::uint64_t seed) : rng_(seed) {}

  Matrix gaussian(Eigen::Index rows, Eigen::Index cols);
  /// G^T G + 1e-3 I.
  Matrix spd(Eigen::Index n);
  /// Q factor of a Gaussian matrix, columns sign-normalized.
  Matrix orthogonal(Eigen::Index n);
  Vector unit_vector(Eigen::Index n);
  int uniform_int(int lo, int hi);
  double uniform(double lo, double hi);

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

struct LemmaTally {
  int held = 0;
  int failed = 0;
  int skipped = 0;

  int tested() const { return held + failed; }
};

/// Runs a randomized lemma until `instances` instances satisfy the hypotheses
/// (or 20x that many draws), dimensions uniform in [n_min, n_max].
/// lemma_a1 instances are built to satisfy the hypothesis: A = Q^T B Q + P
/// with P a small random SPD matrix.
LemmaTally run_lemma_a1(int instances, std::uint64_t seed, int n_min = 2, int n_max = 20);
/// sigma = sigma_factor * lambda_max(R A R^T).
LemmaTally run_lemma_a3(int instances, std::uint64_t seed, double sigma_factor = 1.01,
                        int n_min = 2, int n_max = 20);
/// Held means a positive tau threshold was found; `identity_f` fixes F = I.
LemmaTally run_corollary_a1(int instances, std::uint64_t seed, bool identity_f = false,
                            int n_min = 2, int n_max = 20);

}  // namespace nsfd
