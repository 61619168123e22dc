#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "xfg/geometry.hpp"

namespace xfg {

/// Regular node lattice on a box.  Nodes are numbered with axis 0 fastest;
/// cells (one fewer per axis) use the same ordering.
class Grid {
 public:
  Grid() = default;
  /// resolution = nodes per axis, each >= 2.  Throws ArgumentError otherwise.
  Grid(Box box, std::vector<int> resolution);
  /// Same node count on every axis.
  static Grid uniform(Box box, int nodes_per_axis);

  int dim() const noexcept { return static_cast<int>(resolution_.size()); }
  const Box& box() const noexcept { return box_; }
  const std::vector<int>& resolution() const noexcept { return resolution_; }
  double spacing(int axis) const { return spacing_[static_cast<std::size_t>(axis)]; }
  std::span<const double> spacings() const noexcept { return spacing_; }
  double cell_volume() const noexcept { return cell_volume_; }

  std::size_t node_count() const noexcept { return node_count_; }
  std::size_t cell_count() const noexcept { return cell_count_; }
  int cells_along(int axis) const { return resolution_[static_cast<std::size_t>(axis)] - 1; }

  /// Coordinate of node index i along an axis; exact at both ends.
  double node_coord(int axis, int i) const;
  double cell_center_coord(int axis, int i) const;

  std::size_t node_index(std::span<const int> ijk) const;
  std::size_t cell_index(std::span<const int> ijk) const;
  void node_multi_index(std::size_t index, std::span<int> ijk) const;
  void cell_multi_index(std::size_t index, std::span<int> ijk) const;

  void node_point(std::size_t index, std::span<double> x) const;
  void cell_center(std::size_t cell, std::span<double> x) const;
  std::vector<double> node_point(std::size_t index) const;
  std::vector<double> cell_center(std::size_t cell) const;

  /// Node indices of the 2^n corners of a cell; corner k has offset bit d along axis d.
  void cell_corners(std::size_t cell, std::span<std::size_t> corners) const;

 private:
  Box box_;
  std::vector<int> resolution_;
  std::vector<double> spacing_;
  double cell_volume_ = 0.0;
  std::size_t node_count_ = 0;
  std::size_t cell_count_ = 0;
};

/// Axis-aligned sub-box of a grid's box.  On a grid it is approximated from
/// inside by the cells it fully contains.
struct Subdomain {
  Box box;
};

/// Half-open per-axis cell index ranges [begin, end).
struct CellBlock {
  std::vector<int> begin;
  std::vector<int> end;

  std::size_t cell_count() const;
  bool contains(std::span<const int> ijk) const;
  /// Cell indices of the grid that lie in the block, ascending.
  std::vector<std::size_t> cells(const Grid& grid) const;
};

/// Snaps a subdomain onto the grid.  Throws DomainError when the box leaves
/// the grid box or contains no whole cell.
CellBlock snap(const Grid& grid, const Subdomain& sub);

/// Every cell of the grid.
CellBlock whole(const Grid& grid);

}  // namespace xfg
