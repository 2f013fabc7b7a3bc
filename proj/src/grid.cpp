#include "nsfd/grid.hpp"

#include <algorithm>
#include <sstream>

namespace nsfd {

namespace {

std::string describe(const MultiIndex& idx) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < idx.size(); ++i) os << (i ? "," : "") << idx[i];
  os << ')';
  return os.str();
}

}  // namespace

const char* to_string(NodeClass c) {
  switch (c) {
    case NodeClass::Interior: return "Interior";
    case NodeClass::Boundary: return "Boundary";
    case NodeClass::BoundaryAux: return "BoundaryAux";
    case NodeClass::Ghost: return "Ghost";
    case NodeClass::ExcludedGhost: return "ExcludedGhost";
  }
  return "?";
}

void DomainBox::validate() const {
  if (lower.empty() || lower.size() != upper.size())
    throw InvalidGridError("domain corners must share a positive dimension");
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (!(upper[i] > lower[i]))
      throw InvalidGridError("domain upper bound must exceed lower bound on axis " +
                             std::to_string(i));
  }
}

GridSpec::GridSpec(DomainBox domain, std::vector<int> sizes)
    : domain_(std::move(domain)), sizes_(std::move(sizes)) {
  domain_.validate();
  if (sizes_.size() != domain_.dim())
    throw InvalidGridError("grid sizes do not match the domain dimension");
  for (int j : sizes_) {
    if (j < 2) throw InvalidGridError("every grid size must be at least 2, got " + std::to_string(j));
  }

  const std::size_t d = sizes_.size();
  extended_sizes_.resize(d);
  spacings_.resize(d);
  strides_.resize(d);
  std::ptrdiff_t stride = 1;
  for (std::size_t i = 0; i < d; ++i) {
    extended_sizes_[i] = sizes_[i] + 2;
    spacings_[i] = (domain_.upper[i] - domain_.lower[i]) / (sizes_[i] - 1);
    strides_[i] = stride;
    stride *= extended_sizes_[i];
  }
  h_max_ = *std::max_element(spacings_.begin(), spacings_.end());
  h_min_ = *std::min_element(spacings_.begin(), spacings_.end());

  const auto total = static_cast<std::size_t>(stride);
  classes_.resize(total);
  interior_pos_.assign(total, -1);
  for (std::size_t f = 0; f < total; ++f) {
    NodeClass c = compute_class(unflatten(f));
    classes_[f] = c;
    switch (c) {
      case NodeClass::Interior:
        interior_pos_[f] = static_cast<std::ptrdiff_t>(interior_.size());
        interior_.push_back(f);
        break;
      case NodeClass::BoundaryAux:
        aux_.push_back(f);
        boundary_.push_back(f);
        break;
      case NodeClass::Boundary:
        boundary_.push_back(f);
        break;
      default:
        break;
    }
  }

  for (std::size_t f = 0; f < total; ++f) {
    if (classes_[f] != NodeClass::Ghost) continue;
    MultiIndex idx = unflatten(f);
    for (std::size_t i = 0; i < d; ++i) {
      if (idx[i] == 0 || idx[i] == sizes_[i] + 1) {
        const std::ptrdiff_t inward = idx[i] == 0 ? strides_[i] : -strides_[i];
        ghosts_.push_back({f, static_cast<std::size_t>(static_cast<std::ptrdiff_t>(f) + inward),
                           static_cast<std::size_t>(static_cast<std::ptrdiff_t>(f) + 2 * inward),
                           static_cast<int>(i)});
        break;
      }
    }
  }
}

NodeClass GridSpec::compute_class(const MultiIndex& idx) const {
  const std::size_t d = dim();
  std::size_t outside = 0;
  std::size_t on_face = 0;
  std::size_t interior_axes = 0;
  int out_axis = -1;
  int face_axis = -1;
  for (std::size_t i = 0; i < d; ++i) {
    const int c = idx[i];
    if (c == 0 || c == sizes_[i] + 1) {
      ++outside;
      out_axis = static_cast<int>(i);
    } else if (c == 1 || c == sizes_[i]) {
      ++on_face;
      face_axis = static_cast<int>(i);
    }
    if (interior_component(static_cast<int>(i), c)) ++interior_axes;
  }

  if (outside == 0) {
    if (interior_axes == d) return NodeClass::Interior;
    // A face node whose inward axis neighbour is interior belongs to S_h.
    if (on_face == 1 && interior_axes == d - 1 && sizes_[face_axis] >= 3)
      return NodeClass::BoundaryAux;
    return NodeClass::Boundary;
  }
  if (outside == 1 && interior_axes == d - 1 && sizes_[out_axis] >= 3)
    return NodeClass::Ghost;
  return NodeClass::ExcludedGhost;
}

std::size_t GridSpec::mesh_count() const {
  std::size_t n = 1;
  for (int j : sizes_) n *= static_cast<std::size_t>(j);
  return n;
}

bool GridSpec::in_extended_range(const MultiIndex& idx) const {
  if (idx.size() != dim()) return false;
  for (std::size_t i = 0; i < dim(); ++i) {
    if (idx[i] < 0 || idx[i] > sizes_[i] + 1) return false;
  }
  return true;
}

std::size_t GridSpec::flat(const MultiIndex& idx) const {
  if (!in_extended_range(idx))
    throw IndexError("multi-index " + describe(idx) + " outside the extended mesh");
  std::ptrdiff_t f = 0;
  for (std::size_t i = 0; i < dim(); ++i) f += idx[i] * strides_[i];
  return static_cast<std::size_t>(f);
}

MultiIndex GridSpec::unflatten(std::size_t flat) const {
  if (flat >= classes_.size() && !classes_.empty())
    throw IndexError("flat index " + std::to_string(flat) + " outside the extended mesh");
  MultiIndex idx{std::vector<int>(dim())};
  for (std::size_t i = 0; i < dim(); ++i) {
    idx[i] = static_cast<int>(flat % static_cast<std::size_t>(extended_sizes_[i]));
    flat /= static_cast<std::size_t>(extended_sizes_[i]);
  }
  return idx;
}

Point GridSpec::node_coord(const MultiIndex& idx) const {
  if (!in_extended_range(idx))
    throw IndexError("multi-index " + describe(idx) + " outside the extended mesh");
  Point x(dim());
  for (std::size_t i = 0; i < dim(); ++i) x[i] = domain_.lower[i] + (idx[i] - 1) * spacings_[i];
  return x;
}

double GridSpec::coord_component(std::size_t flat, int axis) const {
  const int c = component(flat, axis);
  return domain_.lower[axis] + (c - 1) * spacings_[axis];
}

double GridSpec::cell_volume() const {
  double v = 1.0;
  for (double h : spacings_) v *= h;
  return v;
}

GridSpec build_grid(DomainBox domain, std::vector<int> sizes) {
  return GridSpec(std::move(domain), std::move(sizes));
}

GridPtr make_grid(DomainBox domain, std::vector<int> sizes) {
  return std::make_shared<const GridSpec>(std::move(domain), std::move(sizes));
}

GridFunction::GridFunction(GridPtr grid, double fill) : grid_(std::move(grid)) {
  const std::size_t n = grid_->extended_count();
  values_.assign(n, 0.0);
  set_.assign(n, 0);
  for (std::size_t f = 0; f < n; ++f) {
    if (grid_->is_mesh_node(f)) {
      values_[f] = fill;
      set_[f] = 1;
    }
  }
}

GridFunction GridFunction::sample(GridPtr grid, const std::function<double(const Point&)>& fn) {
  GridFunction u(grid);
  for (std::size_t f = 0; f < grid->extended_count(); ++f) {
    if (grid->is_mesh_node(f)) u.values_[f] = fn(grid->coord_flat(f));
  }
  return u;
}

GridFunction GridFunction::sample_extended(GridPtr grid,
                                           const std::function<double(const Point&)>& fn) {
  GridFunction u = sample(grid, fn);
  for (const GhostLink& g : grid->ghost_links()) u.set(g.ghost, fn(grid->coord_flat(g.ghost)));
  return u;
}

void GridFunction::set(std::size_t flat, double v) {
  if (flat >= values_.size()) throw IndexError("flat index outside the extended mesh");
  if (grid_->classify_flat(flat) == NodeClass::ExcludedGhost)
    throw StencilDataError("write to excluded ghost node " + describe(grid_->unflatten(flat)));
  values_[flat] = v;
  set_[flat] = 1;
}

void GridFunction::clear_ghosts() {
  for (const GhostLink& g : grid_->ghost_links()) set_[g.ghost] = 0;
}

Vector GridFunction::interior_vector() const {
  const auto& nodes = grid_->interior_nodes();
  Vector v(static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t k = 0; k < nodes.size(); ++k) v[static_cast<Eigen::Index>(k)] = values_[nodes[k]];
  return v;
}

void GridFunction::set_interior(const Vector& v) {
  const auto& nodes = grid_->interior_nodes();
  if (static_cast<std::size_t>(v.size()) != nodes.size())
    throw ContractError("interior vector length does not match the grid");
  for (std::size_t k = 0; k < nodes.size(); ++k) values_[nodes[k]] = v[static_cast<Eigen::Index>(k)];
}

void GridFunction::throw_unset(std::size_t flat) const {
  if (flat >= values_.size()) throw IndexError("flat index outside the extended mesh");
  const MultiIndex idx = grid_->unflatten(flat);
  if (grid_->classify_flat(flat) == NodeClass::ExcludedGhost)
    throw StencilDataError("stencil touched excluded ghost node " + describe(idx));
  throw StencilDataError("stencil read unset value at " + describe(idx));
}

}  // namespace nsfd
