#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "nsfd/grid.hpp"
#include "nsfd/pde_problems.hpp"

namespace nsfd {

/// Moment coefficient gamma (A = gamma * ones(d,d)) and viscosity
/// coefficient beta (beta_vec = beta * ones(d)).
struct SchemeParams {
  double gamma = 0.0;
  double beta = 0.0;
};

/// Human-readable notes for every generalized-monotonicity threshold the
/// parameters miss (gamma >= K_ss/2, beta >= K_s/2). Empty when both hold.
std::vector<std::string> monotonicity_warnings(const SchemeParams& params,
                                               const EllipticityData& ellipticity);

/// Builds SchemeParams and reports missed thresholds on stderr. Never throws
/// for small coefficients; negative ones are a ConfigError.
SchemeParams make_scheme_params(double gamma, double beta, const EllipticityData& ellipticity);

using BoundaryData = std::function<double(const Point&)>;

/// Closes the ghost layer with the auxiliary condition Delta_h U = 0 at every
/// BoundaryAux node: U_ghost = -U_inner + 2 U_b - h_i^2 sum_{j != i} delta^2_j U_b.
void fill_ghosts(GridFunction& u);
GridFunction ghost_fill(const GridFunction& u);

/// Independent arguments of the numerical operator.
struct SlotValues {
  Matrix hat;
  Matrix tilde;
  Vector grad_plus;
  Vector grad_minus;
  double u = 0.0;
};

SlotValues slots_at(const GridFunction& u, std::size_t idx);

/// F((hat + tilde)/2, (g+ + g-)/2, u, x) + gamma ones:(tilde - hat) - beta ones.(g+ - g-).
double hat_f_slots(const SlotValues& slots, const Point& x, const SchemeParams& params,
                   const PdeOperator& op);

/// Numerical operator at an interior node from the data of u (ghosts must be
/// filled). The viscosity is taken as beta sum_i h_i delta^2_{x_i} U.
double hat_f_at(const GridFunction& u, std::size_t idx, const SchemeParams& params,
                const PdeOperator& op);

struct Residual {
  GridFunction values;  // set on interior nodes only
  double max_abs = 0.0;
};

/// Overwrites the boundary with g, closes the ghosts and evaluates the
/// numerical operator at every interior node.
Residual residual(const GridFunction& u, const SchemeParams& params, const PdeOperator& op,
                  const BoundaryData& g);

enum class SlotKind { Hat, Tilde, GradPlus, GradMinus, U };

struct Slot {
  SlotKind kind = SlotKind::U;
  int i = 0;
  int j = 0;
};

/// hat_f_slots with one independent slot raised by epsilon, minus the
/// unperturbed value. Matrix slots perturb the single entry (i, j).
double monotonicity_probe(const GridFunction& u, std::size_t idx, const SchemeParams& params,
                          const PdeOperator& op, Slot slot, double epsilon);

/// Sign the generalized monotonicity lemma requires of a probe: -1 for the
/// hat and forward-gradient slots, +1 otherwise.
int required_probe_sign(SlotKind kind);

/// Reusable residual evaluation for the solvers: caches boundary values and
/// works on interior-ordered vectors.
class SchemeAssembler {
 public:
  SchemeAssembler(GridPtr grid, SchemeParams params, const PdeOperator& op, const BoundaryData& g);

  const GridSpec& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const SchemeParams& params() const { return params_; }
  const PdeOperator& op() const { return op_; }

  /// Grid function with the given interior values, boundary g, ghosts closed.
  GridFunction assemble(const Vector& interior) const;
  void impose_boundary(GridFunction& u) const;

  /// Residual at every interior node of u; u's boundary and ghosts must
  /// already be consistent (see assemble).
  Vector evaluate(const GridFunction& u) const;
  Vector evaluate(const Vector& interior) const { return evaluate(assemble(interior)); }

  /// Active operator piece at every interior node (all 0 for smooth operators).
  std::vector<int> select_branches(const GridFunction& u) const;
  /// Residual with the operator piece at each node held fixed.
  Vector evaluate(const GridFunction& u, const std::vector<int>& branches) const;

 private:
  GridPtr grid_;
  SchemeParams params_;
  PdeOperator op_;
  std::vector<double> boundary_values_;
  std::vector<Point> interior_coords_;
};

}  // namespace nsfd
