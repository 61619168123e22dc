#pragma once

// Data-parallel inner loops shared by the solvers and quadrature code.
//
// Every kernel has a scalar reference in xfg::kernels::scalar and, on x86-64,
// an AVX2 variant in xfg::kernels::avx2.  The unqualified entry points in
// xfg::kernels forward to whichever backend was selected at startup (AVX2 when
// the CPU reports it, overridable with XFG_SIMD=scalar or set_backend()).
//
// Elementwise kernels (axpy, xpay, gradient_row) round identically on both
// backends.  Reductions (dot, sum) use a different association order under
// AVX2, so results agree to a few ulps of the summed magnitudes but not
// bitwise.  Within one backend every reduction is deterministic.

#include <cstddef>
#include <span>
#include <string_view>

namespace xfg::kernels {

enum class Backend { scalar, avx2 };

/// Corner node rows feeding one row of cells in gradient_row.
///
/// For an n-dimensional grid a row of cells along axis 0 touches 2^(n-1) node
/// rows.  rows[k] is the row whose offsets along axes 1..n-1 are the bits of k
/// (bit 0 -> axis 1, bit 1 -> axis 2).  Each row has cells+1 values.
struct CornerRows {
  const double* rows[4] = {nullptr, nullptr, nullptr, nullptr};
  int dim = 1;
};

namespace scalar {
double dot(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> a);
double max_abs(std::span<const double> a);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void xpay(std::span<const double> x, double beta, std::span<double> y);
void gradient_row(const CornerRows& corners, std::size_t cells,
                  std::span<const double> inv_spacing, double* const* out);
}  // namespace scalar

#if defined(XFG_HAVE_AVX2)
namespace avx2 {
double dot(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> a);
double max_abs(std::span<const double> a);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void xpay(std::span<const double> x, double beta, std::span<double> y);
void gradient_row(const CornerRows& corners, std::size_t cells,
                  std::span<const double> inv_spacing, double* const* out);
}  // namespace avx2
#endif

/// True when the running CPU can execute the AVX2 variants.
bool avx2_supported();

Backend active_backend();
/// Selects a backend; requesting avx2 on a CPU without it falls back to scalar.
void set_backend(Backend backend);
std::string_view backend_name(Backend backend);

/// <a, b>.  Sizes must match.
double dot(std::span<const double> a, std::span<const double> b);
/// Pairwise sum.
double sum(std::span<const double> a);
double max_abs(std::span<const double> a);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
/// y = x + beta * y
void xpay(std::span<const double> x, double beta, std::span<double> y);
/// Corner-averaged forward differences for one row of cells.
///
/// out[d][i] receives the axis-d derivative at the centre of cell i, where
/// d runs over 0..corners.dim-1.  inv_spacing[d] = 1 / h_d.
void gradient_row(const CornerRows& corners, std::size_t cells,
                  std::span<const double> inv_spacing, double* const* out);

}  // namespace xfg::kernels
