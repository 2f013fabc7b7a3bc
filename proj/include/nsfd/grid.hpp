#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "nsfd/errors.hpp"

namespace nsfd {

using Point = Eigen::VectorXd;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Axis-aligned box (a_1,b_1) x ... x (a_d,b_d).
struct DomainBox {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t dim() const { return lower.size(); }

  /// Throws InvalidGridError unless both corners have the same positive
  /// dimension and upper[i] > lower[i].
  void validate() const;

  static DomainBox unit(std::size_t d) {
    return {std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)};
  }
};

/// Multi-index into the extended mesh. Mesh nodes use 1..J_i along each
/// axis; the ghost layer sits at 0 and J_i + 1.
struct MultiIndex {
  std::vector<int> components;

  MultiIndex() = default;
  MultiIndex(std::initializer_list<int> c) : components(c) {}
  explicit MultiIndex(std::vector<int> c) : components(std::move(c)) {}

  std::size_t size() const { return components.size(); }
  int operator[](std::size_t i) const { return components[i]; }
  int& operator[](std::size_t i) { return components[i]; }
  bool operator==(const MultiIndex&) const = default;
};

enum class NodeClass : std::uint8_t {
  Interior,
  Boundary,
  BoundaryAux,
  Ghost,
  ExcludedGhost,
};

const char* to_string(NodeClass c);

/// Ghost node together with the data the auxiliary closure needs: the
/// boundary node it hangs off and the interior node mirrored across it.
struct GhostLink {
  std::size_t ghost;
  std::size_t boundary;
  std::size_t inner;
  int axis;
};

/// Uniform tensor-product mesh of a d-rectangle with a one-node ghost layer.
/// Immutable after construction.
class GridSpec {
 public:
  GridSpec(DomainBox domain, std::vector<int> sizes);

  std::size_t dim() const { return sizes_.size(); }
  const DomainBox& domain() const { return domain_; }
  const std::vector<int>& sizes() const { return sizes_; }
  const std::vector<double>& spacings() const { return spacings_; }
  double spacing(int axis) const { return spacings_[axis]; }
  double h_max() const { return h_max_; }
  double h_min() const { return h_min_; }

  /// Nodes of the dense extended box, ExcludedGhost corners included.
  std::size_t extended_count() const { return classes_.size(); }
  std::size_t mesh_count() const;
  std::size_t interior_count() const { return interior_.size(); }

  std::ptrdiff_t stride(int axis) const { return strides_[axis]; }

  std::size_t flat(const MultiIndex& idx) const;
  MultiIndex unflatten(std::size_t flat) const;
  bool in_extended_range(const MultiIndex& idx) const;

  NodeClass classify(const MultiIndex& idx) const { return classes_[flat(idx)]; }
  NodeClass classify_flat(std::size_t flat) const { return classes_.at(flat); }

  Point node_coord(const MultiIndex& idx) const;
  Point coord_flat(std::size_t flat) const { return node_coord(unflatten(flat)); }
  double coord_component(std::size_t flat, int axis) const;
  /// Component of the multi-index of a flat node along one axis.
  int component(std::size_t flat, int axis) const {
    return static_cast<int>((flat / static_cast<std::size_t>(strides_[axis])) %
                            static_cast<std::size_t>(extended_sizes_[axis]));
  }

  bool is_mesh_node(std::size_t flat) const {
    NodeClass c = classes_[flat];
    return c == NodeClass::Interior || c == NodeClass::Boundary ||
           c == NodeClass::BoundaryAux;
  }

  /// Interior nodes in lexicographic order (axis 0 fastest). This is the
  /// ordering of every interior-sized vector in the library.
  const std::vector<std::size_t>& interior_nodes() const { return interior_; }
  /// All nodes on the boundary, BoundaryAux included.
  const std::vector<std::size_t>& boundary_nodes() const { return boundary_; }
  const std::vector<std::size_t>& aux_nodes() const { return aux_; }
  const std::vector<GhostLink>& ghost_links() const { return ghosts_; }

  /// Position of an interior node in interior_nodes(), or -1.
  std::ptrdiff_t interior_position(std::size_t flat) const { return interior_pos_[flat]; }

  double cell_volume() const;

 private:
  NodeClass compute_class(const MultiIndex& idx) const;
  bool interior_component(int axis, int c) const { return c >= 2 && c <= sizes_[axis] - 1; }

  DomainBox domain_;
  std::vector<int> sizes_;
  std::vector<int> extended_sizes_;
  std::vector<double> spacings_;
  std::vector<std::ptrdiff_t> strides_;
  double h_max_ = 0.0;
  double h_min_ = 0.0;
  std::vector<NodeClass> classes_;
  std::vector<std::size_t> interior_;
  std::vector<std::size_t> boundary_;
  std::vector<std::size_t> aux_;
  std::vector<GhostLink> ghosts_;
  std::vector<std::ptrdiff_t> interior_pos_;
};

using GridPtr = std::shared_ptr<const GridSpec>;

/// Throws InvalidGridError for any size below 2 or a malformed domain.
GridSpec build_grid(DomainBox domain, std::vector<int> sizes);
GridPtr make_grid(DomainBox domain, std::vector<int> sizes);

/// Real values on the extended mesh. Mesh nodes start at a fill value; ghost
/// nodes start unset and are written by ghost_fill (or explicitly).
class GridFunction {
 public:
  explicit GridFunction(GridPtr grid, double fill = 0.0);

  /// Samples fn at every mesh node; ghosts left unset.
  static GridFunction sample(GridPtr grid, const std::function<double(const Point&)>& fn);
  /// Samples fn at every mesh node and every valid ghost node.
  static GridFunction sample_extended(GridPtr grid, const std::function<double(const Point&)>& fn);

  const GridSpec& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }

  /// Checked read; throws StencilDataError for unset or excluded nodes.
  double at(std::size_t flat) const {
    if (!set_[flat]) throw_unset(flat);
    return values_[flat];
  }
  double at(const MultiIndex& idx) const { return at(grid_->flat(idx)); }

  bool is_set(std::size_t flat) const { return set_[flat] != 0; }

  /// Throws StencilDataError when writing an ExcludedGhost node.
  void set(std::size_t flat, double v);
  void set(const MultiIndex& idx, double v) { set(grid_->flat(idx), v); }

  /// Marks every ghost node unset.
  void clear_ghosts();

  /// Interior values in interior_nodes() order.
  Vector interior_vector() const;
  void set_interior(const Vector& v);

  std::span<const double> raw() const { return values_; }

 private:
  [[noreturn]] void throw_unset(std::size_t flat) const;

  GridPtr grid_;
  std::vector<double> values_;
  std::vector<std::uint8_t> set_;
};

}  // namespace nsfd
