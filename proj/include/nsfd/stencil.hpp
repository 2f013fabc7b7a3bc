#pragma once

#include <cstddef>

#include "nsfd/grid.hpp"

namespace nsfd {

enum class Side { Forward, Backward };
enum class Width { H, TwoH };
enum class MixedFlavor { Hat, Tilde, Bar };
/// Xi runs along e_i - e_j, Eta along e_i + e_j.
enum class Diagonal { Xi, Eta };

struct DiscreteGradients {
  Vector forward;
  Vector backward;
  Vector central;
};

/// The three centred Hessians plus the standard central one. All are
/// symmetric by construction.
struct DiscreteHessians {
  Matrix hat;
  Matrix tilde;
  Matrix bar;
  Matrix standard;
};

// Every operator below evaluates pointwise at a flat extended-mesh index and
// throws StencilDataError when a referenced value is unset or excluded.

double diff_sided(const GridFunction& u, std::size_t idx, int axis, Side side);

/// Three-point centred second difference at spacing h_i or 2h_i.
double second_diff(const GridFunction& u, std::size_t idx, int axis, Width width);

/// Five-point diagonal entry of the tilde Hessian,
/// (U_{-2} - 2U_{-1} + 2U - 2U_{+1} + U_{+2}) / (2 h^2).
double tilde_diagonal(const GridFunction& u, std::size_t idx, int axis);

/// Mixed (i != j) entry of the hat, tilde or bar Hessian from the explicit
/// corner formulas. Throws ContractError when i == j.
double mixed_second(const GridFunction& u, std::size_t idx, int i, int j, MixedFlavor flavor);

/// Second difference along a cell diagonal, scaled by h_i^2 + h_j^2.
double diag_second(const GridFunction& u, std::size_t idx, int i, int j, Diagonal direction);

/// Sided Hessian entry D^{mu nu}_{ij} = delta^nu_{x_j} delta^mu_{x_i} U.
double sided_hessian(const GridFunction& u, std::size_t idx, int i, int j, Side mu, Side nu);

DiscreteGradients gradients(const GridFunction& u, std::size_t idx);
DiscreteHessians hessians(const GridFunction& u, std::size_t idx);

/// tilde - hat. Vanishes on quadratics; equals (h_i h_j / 2) delta_i^2 delta_j^2 U.
Matrix moment_difference(const GridFunction& u, std::size_t idx);

// MultiIndex conveniences.
inline double diff_sided(const GridFunction& u, const MultiIndex& idx, int axis, Side side) {
  return diff_sided(u, u.grid().flat(idx), axis, side);
}
inline double second_diff(const GridFunction& u, const MultiIndex& idx, int axis, Width width) {
  return second_diff(u, u.grid().flat(idx), axis, width);
}
inline double mixed_second(const GridFunction& u, const MultiIndex& idx, int i, int j,
                           MixedFlavor flavor) {
  return mixed_second(u, u.grid().flat(idx), i, j, flavor);
}
inline double diag_second(const GridFunction& u, const MultiIndex& idx, int i, int j,
                          Diagonal direction) {
  return diag_second(u, u.grid().flat(idx), i, j, direction);
}
inline DiscreteGradients gradients(const GridFunction& u, const MultiIndex& idx) {
  return gradients(u, u.grid().flat(idx));
}
inline DiscreteHessians hessians(const GridFunction& u, const MultiIndex& idx) {
  return hessians(u, u.grid().flat(idx));
}
inline Matrix moment_difference(const GridFunction& u, const MultiIndex& idx) {
  return moment_difference(u, u.grid().flat(idx));
}

}  // namespace nsfd
