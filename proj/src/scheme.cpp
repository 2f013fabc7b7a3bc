#include "nsfd/scheme.hpp"

#include <cmath>
#include <iostream>
#include <sstream>

#include "nsfd/stencil.hpp"

namespace nsfd {

std::vector<std::string> monotonicity_warnings(const SchemeParams& params,
                                               const EllipticityData& ellipticity) {
  std::vector<std::string> out;
  if (params.gamma < 0.5 * ellipticity.K_ss) {
    std::ostringstream os;
    os << "gamma = " << params.gamma << " is below K_ss/2 = " << 0.5 * ellipticity.K_ss
       << "; generalized monotonicity is not guaranteed";
    out.push_back(os.str());
  }
  if (params.beta < 0.5 * ellipticity.K_s) {
    std::ostringstream os;
    os << "beta = " << params.beta << " is below K_s/2 = " << 0.5 * ellipticity.K_s
       << "; generalized monotonicity is not guaranteed";
    out.push_back(os.str());
  }
  return out;
}

SchemeParams make_scheme_params(double gamma, double beta, const EllipticityData& ellipticity) {
  if (gamma < 0.0 || beta < 0.0) throw ConfigError("gamma and beta must be nonnegative");
  SchemeParams p{gamma, beta};
  for (const std::string& w : monotonicity_warnings(p, ellipticity)) std::cerr << "warning: " << w << '\n';
  return p;
}

void fill_ghosts(GridFunction& u) {
  const GridSpec& g = u.grid();
  const int d = static_cast<int>(g.dim());
  for (const GhostLink& link : g.ghost_links()) {
    double tangential = 0.0;
    for (int j = 0; j < d; ++j) {
      if (j == link.axis) continue;
      const std::size_t b = link.boundary;
      const int c = g.component(b, j);
      if (c <= 1 || c >= g.sizes()[j]) {
        throw TopologyError("tangential stencil of an auxiliary boundary node leaves the mesh");
      }
      const std::ptrdiff_t s = g.stride(j);
      const double hj = g.spacing(j);
      tangential += (u.at(b + s) - 2.0 * u.at(b) + u.at(b - s)) / (hj * hj);
    }
    const double hi = g.spacing(link.axis);
    u.set(link.ghost, -u.at(link.inner) + 2.0 * u.at(link.boundary) - hi * hi * tangential);
  }
}

GridFunction ghost_fill(const GridFunction& u) {
  GridFunction out = u;
  fill_ghosts(out);
  return out;
}

SlotValues slots_at(const GridFunction& u, std::size_t idx) {
  DiscreteHessians hs = hessians(u, idx);
  DiscreteGradients gs = gradients(u, idx);
  return SlotValues{std::move(hs.hat), std::move(hs.tilde), std::move(gs.forward),
                    std::move(gs.backward), u.at(idx)};
}

double hat_f_slots(const SlotValues& s, const Point& x, const SchemeParams& params,
                   const PdeOperator& op) {
  const Matrix bar = 0.5 * (s.hat + s.tilde);
  const Vector central = 0.5 * (s.grad_plus + s.grad_minus);
  return op.evaluate(bar, central, s.u, x) + params.gamma * (s.tilde - s.hat).sum() -
         params.beta * (s.grad_plus - s.grad_minus).sum();
}

namespace {

// branch < 0 evaluates the full operator, otherwise the given piece.
double hat_f_physical(const GridFunction& u, std::size_t idx, const Point& x,
                      const SchemeParams& params, const PdeOperator& op, int branch = -1) {
  const GridSpec& g = u.grid();
  const DiscreteHessians hs = hessians(u, idx);
  const DiscreteGradients gs = gradients(u, idx);
  double viscosity = 0.0;
  for (Eigen::Index i = 0; i < hs.hat.rows(); ++i)
    viscosity += g.spacing(static_cast<int>(i)) * hs.hat(i, i);
  const double f = branch < 0 ? op.evaluate(hs.bar, gs.central, u.at(idx), x)
                              : op.evaluate_branch(hs.bar, gs.central, u.at(idx), x, branch);
  return f + params.gamma * (hs.tilde - hs.hat).sum() - params.beta * viscosity;
}

}  // namespace

double hat_f_at(const GridFunction& u, std::size_t idx, const SchemeParams& params,
                const PdeOperator& op) {
  return hat_f_physical(u, idx, u.grid().coord_flat(idx), params, op);
}

Residual residual(const GridFunction& u, const SchemeParams& params, const PdeOperator& op,
                  const BoundaryData& g) {
  GridFunction work = u;
  const GridSpec& grid = u.grid();
  for (std::size_t b : grid.boundary_nodes()) work.set(b, g(grid.coord_flat(b)));
  work.clear_ghosts();
  fill_ghosts(work);

  Residual out{GridFunction(u.grid_ptr()), 0.0};
  for (std::size_t f : grid.interior_nodes()) {
    const double r = hat_f_at(work, f, params, op);
    out.values.set(f, r);
    out.max_abs = std::max(out.max_abs, std::abs(r));
  }
  return out;
}

int required_probe_sign(SlotKind kind) {
  return (kind == SlotKind::Hat || kind == SlotKind::GradPlus) ? -1 : 1;
}

double monotonicity_probe(const GridFunction& u, std::size_t idx, const SchemeParams& params,
                          const PdeOperator& op, Slot slot, double epsilon) {
  if (!(epsilon > 0.0)) throw ContractError("monotonicity probe needs epsilon > 0");
  const auto d = static_cast<int>(u.grid().dim());
  const bool matrix_slot = slot.kind == SlotKind::Hat || slot.kind == SlotKind::Tilde;
  const bool vector_slot = slot.kind == SlotKind::GradPlus || slot.kind == SlotKind::GradMinus;
  if ((matrix_slot || vector_slot) && (slot.i < 0 || slot.i >= d))
    throw ContractError("probe slot index out of range");
  if (matrix_slot && (slot.j < 0 || slot.j >= d)) throw ContractError("probe slot index out of range");

  const SlotValues base = slots_at(u, idx);
  SlotValues bumped = base;
  switch (slot.kind) {
    case SlotKind::Hat: bumped.hat(slot.i, slot.j) += epsilon; break;
    case SlotKind::Tilde: bumped.tilde(slot.i, slot.j) += epsilon; break;
    case SlotKind::GradPlus: bumped.grad_plus[slot.i] += epsilon; break;
    case SlotKind::GradMinus: bumped.grad_minus[slot.i] += epsilon; break;
    case SlotKind::U: bumped.u += epsilon; break;
  }
  const Point x = u.grid().coord_flat(idx);
  return hat_f_slots(bumped, x, params, op) - hat_f_slots(base, x, params, op);
}

SchemeAssembler::SchemeAssembler(GridPtr grid, SchemeParams params, const PdeOperator& op,
                                 const BoundaryData& g)
    : grid_(std::move(grid)), params_(params), op_(op) {
  boundary_values_.reserve(grid_->boundary_nodes().size());
  for (std::size_t b : grid_->boundary_nodes()) boundary_values_.push_back(g(grid_->coord_flat(b)));
  interior_coords_.reserve(grid_->interior_count());
  for (std::size_t f : grid_->interior_nodes()) interior_coords_.push_back(grid_->coord_flat(f));
}

void SchemeAssembler::impose_boundary(GridFunction& u) const {
  const auto& nodes = grid_->boundary_nodes();
  for (std::size_t k = 0; k < nodes.size(); ++k) u.set(nodes[k], boundary_values_[k]);
}

GridFunction SchemeAssembler::assemble(const Vector& interior) const {
  GridFunction u(grid_);
  u.set_interior(interior);
  impose_boundary(u);
  fill_ghosts(u);
  return u;
}

Vector SchemeAssembler::evaluate(const GridFunction& u) const {
  const auto& nodes = grid_->interior_nodes();
  Vector r(static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t k = 0; k < nodes.size(); ++k)
    r[static_cast<Eigen::Index>(k)] = hat_f_physical(u, nodes[k], interior_coords_[k], params_, op_);
  return r;
}

std::vector<int> SchemeAssembler::select_branches(const GridFunction& u) const {
  const auto& nodes = grid_->interior_nodes();
  std::vector<int> out(nodes.size(), 0);
  if (!op_.has_branches()) return out;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const DiscreteHessians hs = hessians(u, nodes[k]);
    const DiscreteGradients gs = gradients(u, nodes[k]);
    out[k] = op_.select_branch(hs.bar, gs.central, u.at(nodes[k]), interior_coords_[k]);
  }
  return out;
}

Vector SchemeAssembler::evaluate(const GridFunction& u, const std::vector<int>& branches) const {
  const auto& nodes = grid_->interior_nodes();
  if (branches.size() != nodes.size()) throw ContractError("one branch per interior node expected");
  Vector r(static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t k = 0; k < nodes.size(); ++k)
    r[static_cast<Eigen::Index>(k)] =
        hat_f_physical(u, nodes[k], interior_coords_[k], params_, op_, branches[k]);
  return r;
}

}  // namespace nsfd
