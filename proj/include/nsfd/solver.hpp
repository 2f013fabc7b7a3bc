#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "nsfd/errors.hpp"
#include "nsfd/grid.hpp"
#include "nsfd/scheme.hpp"

namespace nsfd {

struct SolverConfig {
  enum class Method { Euler, Newton, NewtonWithEulerFallback };

  /// Pseudo time-step; nullopt selects it automatically (auto_rho plus halving).
  std::optional<double> rho;
  double tol_residual = 1e-8;
  double tol_update = 1e-10;
  int max_iters = 200000;
  Method method = Method::NewtonWithEulerFallback;
  /// Initial Newton step length before the halving line search.
  double damping = 1.0;
  /// Consecutive update ratios > 1 tolerated once rho can no longer shrink.
  int divergence_window = 20;
  int max_halvings = 40;

  void validate() const;
};

struct SolveReport {
  GridFunction solution;
  int iterations = 0;
  double final_residual = 0.0;
  double final_update_norm = 0.0;
  /// Per-iteration ratios ||U_{k+1} - U_k||_2 / ||U_k - U_{k-1}||_2.
  std::vector<double> contraction_estimates;
  bool converged = false;
  /// Pseudo time-step in effect at the end (Euler only).
  double rho = 0.0;
};

class NonconvergenceError : public SolverError {
 public:
  NonconvergenceError(const std::string& what, SolveReport report)
      : SolverError(what), report_(std::move(report)) {}
  const SolveReport& report() const { return report_; }

 private:
  SolveReport report_;
};

/// One step of the pseudo-time map: interior U - rho * F_hat[U], boundary g,
/// ghosts re-closed.
GridFunction euler_step(const GridFunction& u, double rho, const SchemeParams& params,
                        const PdeOperator& op, const BoundaryData& g);

/// 1 / (K0 + sum_i K_ss 4/h_i^2 + gamma sum_ij 8/(h_i h_j) + beta sum_i 2/h_i).
double auto_rho(const SchemeParams& params, const PdeOperator& op, const GridSpec& grid);

SolveReport solve_fixed_point(const GridFunction& u0, const SolverConfig& cfg,
                              const SchemeParams& params, const PdeOperator& op,
                              const BoundaryData& g);

SolveReport solve_newton(const GridFunction& u0, const SolverConfig& cfg, const SchemeParams& params,
                         const PdeOperator& op, const BoundaryData& g);

/// Dispatches on cfg.method.
SolveReport solve(const GridFunction& u0, const SolverConfig& cfg, const SchemeParams& params,
                  const PdeOperator& op, const BoundaryData& g);

/// Interior Jacobian of the scheme residual at the given interior vector,
/// assembled column-wise by colored finite differences.
Eigen::SparseMatrix<double> scheme_jacobian(const SchemeAssembler& assembler, const Vector& interior,
                                            const Vector& base_residual);

struct StabilityDiagnostics {
  double weighted_l2 = 0.0;          // (prod h_i^{1/2}) ||U||_{l2(interior)}
  std::vector<double> h2_diag;       // per axis, (prod h_i^{1/2}) ||delta^2_{x_l,2h_l} U||_{l2}
  double linf = 0.0;                 // max over mesh nodes
};

/// u must have its ghosts closed.
StabilityDiagnostics stability_diagnostics(const GridFunction& u);

}  // namespace nsfd
