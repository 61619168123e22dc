#include "xfg/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "xfg/errors.hpp"

namespace xfg {

Box::Box(std::vector<double> lo_, std::vector<double> hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
  if (lo.size() != hi.size()) throw ArgumentError("box: lo and hi differ in dimension");
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (!std::isfinite(lo[i]) || !std::isfinite(hi[i]))
      throw ArgumentError("box: bounds must be finite");
    if (!(lo[i] < hi[i])) throw ArgumentError("box: need lo < hi on every axis");
  }
}

Box Box::cube(int n, double lo, double hi) {
  return Box(std::vector<double>(static_cast<std::size_t>(n), lo),
             std::vector<double>(static_cast<std::size_t>(n), hi));
}

double Box::volume() const {
  double v = 1.0;
  for (std::size_t i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
  return v;
}

bool Box::contains(std::span<const double> x) const {
  if (x.size() != lo.size()) return false;
  for (std::size_t i = 0; i < lo.size(); ++i) {
    const double slack = 1e-12 * std::max({1.0, std::fabs(lo[i]), std::fabs(hi[i])});
    if (!(x[i] >= lo[i] - slack && x[i] <= hi[i] + slack)) return false;
  }
  return true;
}

bool Box::contains(const Box& other) const {
  return other.dim() == dim() && contains(other.lo) && contains(other.hi);
}

std::string Box::describe() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < lo.size(); ++i)
    os << (i ? " x " : "") << "[" << lo[i] << ", " << hi[i] << "]";
  return os.str();
}

std::string format_point(std::span<const double> x) {
  std::ostringstream os;
  os.precision(6);
  os << "(";
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ")";
  return os.str();
}

Grid::Grid(Box box, std::vector<int> resolution) : box_(std::move(box)), resolution_(std::move(resolution)) {
  if (resolution_.empty() || resolution_.size() > 3)
    throw ArgumentError("grid: only 1, 2 or 3 dimensions are supported");
  if (static_cast<int>(resolution_.size()) != box_.dim())
    throw ArgumentError("grid: resolution and box differ in dimension");
  node_count_ = 1;
  cell_count_ = 1;
  cell_volume_ = 1.0;
  for (std::size_t d = 0; d < resolution_.size(); ++d) {
    if (resolution_[d] < 2) throw ArgumentError("grid: need at least 2 nodes per axis");
    const double h = (box_.hi[d] - box_.lo[d]) / (resolution_[d] - 1);
    spacing_.push_back(h);
    cell_volume_ *= h;
    node_count_ *= static_cast<std::size_t>(resolution_[d]);
    cell_count_ *= static_cast<std::size_t>(resolution_[d] - 1);
  }
}

Grid Grid::uniform(Box box, int nodes_per_axis) {
  const int n = box.dim();
  return Grid(std::move(box), std::vector<int>(static_cast<std::size_t>(n), nodes_per_axis));
}

double Grid::node_coord(int axis, int i) const {
  const auto d = static_cast<std::size_t>(axis);
  const int last = resolution_[d] - 1;
  if (i == last) return box_.hi[d];
  const double t = static_cast<double>(i) / last;
  return box_.lo[d] + (box_.hi[d] - box_.lo[d]) * t;
}

double Grid::cell_center_coord(int axis, int i) const {
  const auto d = static_cast<std::size_t>(axis);
  const double t = (i + 0.5) / (resolution_[d] - 1);
  return box_.lo[d] + (box_.hi[d] - box_.lo[d]) * t;
}

std::size_t Grid::node_index(std::span<const int> ijk) const {
  std::size_t idx = 0;
  for (int d = dim() - 1; d >= 0; --d)
    idx = idx * static_cast<std::size_t>(resolution_[static_cast<std::size_t>(d)]) +
          static_cast<std::size_t>(ijk[static_cast<std::size_t>(d)]);
  return idx;
}

std::size_t Grid::cell_index(std::span<const int> ijk) const {
  std::size_t idx = 0;
  for (int d = dim() - 1; d >= 0; --d)
    idx = idx * static_cast<std::size_t>(resolution_[static_cast<std::size_t>(d)] - 1) +
          static_cast<std::size_t>(ijk[static_cast<std::size_t>(d)]);
  return idx;
}

void Grid::node_multi_index(std::size_t index, std::span<int> ijk) const {
  for (int d = 0; d < dim(); ++d) {
    const auto r = static_cast<std::size_t>(resolution_[static_cast<std::size_t>(d)]);
    ijk[static_cast<std::size_t>(d)] = static_cast<int>(index % r);
    index /= r;
  }
}

void Grid::cell_multi_index(std::size_t index, std::span<int> ijk) const {
  for (int d = 0; d < dim(); ++d) {
    const auto r = static_cast<std::size_t>(resolution_[static_cast<std::size_t>(d)] - 1);
    ijk[static_cast<std::size_t>(d)] = static_cast<int>(index % r);
    index /= r;
  }
}

void Grid::node_point(std::size_t index, std::span<double> x) const {
  int ijk[3] = {0, 0, 0};
  node_multi_index(index, std::span<int>(ijk, static_cast<std::size_t>(dim())));
  for (int d = 0; d < dim(); ++d) x[static_cast<std::size_t>(d)] = node_coord(d, ijk[d]);
}

void Grid::cell_center(std::size_t cell, std::span<double> x) const {
  int ijk[3] = {0, 0, 0};
  cell_multi_index(cell, std::span<int>(ijk, static_cast<std::size_t>(dim())));
  for (int d = 0; d < dim(); ++d) x[static_cast<std::size_t>(d)] = cell_center_coord(d, ijk[d]);
}

std::vector<double> Grid::node_point(std::size_t index) const {
  std::vector<double> x(static_cast<std::size_t>(dim()));
  node_point(index, x);
  return x;
}

std::vector<double> Grid::cell_center(std::size_t cell) const {
  std::vector<double> x(static_cast<std::size_t>(dim()));
  cell_center(cell, x);
  return x;
}

void Grid::cell_corners(std::size_t cell, std::span<std::size_t> corners) const {
  const int n = dim();
  int ijk[3] = {0, 0, 0};
  cell_multi_index(cell, std::span<int>(ijk, static_cast<std::size_t>(n)));
  const std::size_t base = node_index(std::span<const int>(ijk, static_cast<std::size_t>(n)));
  for (std::size_t k = 0; k < (std::size_t{1} << n); ++k) {
    std::size_t offset = 0;
    std::size_t stride = 1;
    for (int d = 0; d < n; ++d) {
      if (k & (std::size_t{1} << d)) offset += stride;
      stride *= static_cast<std::size_t>(resolution_[static_cast<std::size_t>(d)]);
    }
    corners[k] = base + offset;
  }
}

std::size_t CellBlock::cell_count() const {
  std::size_t c = 1;
  for (std::size_t d = 0; d < begin.size(); ++d) c *= static_cast<std::size_t>(end[d] - begin[d]);
  return c;
}

bool CellBlock::contains(std::span<const int> ijk) const {
  for (std::size_t d = 0; d < begin.size(); ++d)
    if (ijk[d] < begin[d] || ijk[d] >= end[d]) return false;
  return true;
}

std::vector<std::size_t> CellBlock::cells(const Grid& grid) const {
  std::vector<std::size_t> out;
  out.reserve(cell_count());
  const int n = grid.dim();
  std::vector<int> ijk(begin);
  if (cell_count() == 0) return out;
  for (;;) {
    out.push_back(grid.cell_index(ijk));
    int d = 0;
    for (; d < n; ++d) {
      if (++ijk[static_cast<std::size_t>(d)] < end[static_cast<std::size_t>(d)]) break;
      ijk[static_cast<std::size_t>(d)] = begin[static_cast<std::size_t>(d)];
    }
    if (d == n) break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

CellBlock snap(const Grid& grid, const Subdomain& sub) {
  const int n = grid.dim();
  if (sub.box.dim() != n) throw DomainError("subdomain dimension does not match the grid");
  if (!grid.box().contains(sub.box))
    throw DomainError("subdomain " + sub.box.describe() + " leaves the grid box " + grid.box().describe());
  CellBlock block;
  for (int d = 0; d < n; ++d) {
    const auto sd = static_cast<std::size_t>(d);
    const double h = grid.spacing(d);
    const double lo = (sub.box.lo[sd] - grid.box().lo[sd]) / h;
    const double hi = (sub.box.hi[sd] - grid.box().lo[sd]) / h;
    const double slack = 1e-9;
    int b = static_cast<int>(std::ceil(lo - slack));
    int e = static_cast<int>(std::floor(hi + slack));
    b = std::max(b, 0);
    e = std::min(e, grid.cells_along(d));
    if (e <= b) throw DomainError("subdomain " + sub.box.describe() + " contains no whole cell");
    block.begin.push_back(b);
    block.end.push_back(e);
  }
  return block;
}

CellBlock whole(const Grid& grid) {
  CellBlock block;
  for (int d = 0; d < grid.dim(); ++d) {
    block.begin.push_back(0);
    block.end.push_back(grid.cells_along(d));
  }
  return block;
}

}  // namespace xfg
