#pragma once

#include <span>
#include <string>
#include <vector>

namespace xfg {

/// Axis-aligned box [lo_1, hi_1] x ... x [lo_n, hi_n].
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  Box() = default;
  Box(std::vector<double> lo_, std::vector<double> hi_);

  /// [lo, hi]^n
  static Box cube(int n, double lo, double hi);

  int dim() const noexcept { return static_cast<int>(lo.size()); }
  double volume() const;
  /// Membership with a relative slack of 1e-12 per axis, so lattice points
  /// produced by rounding stay inside.
  bool contains(std::span<const double> x) const;
  bool contains(const Box& other) const;
  std::string describe() const;
};

std::string format_point(std::span<const double> x);

}  // namespace xfg
