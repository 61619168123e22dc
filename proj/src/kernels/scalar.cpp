#include "xfg/kernels.hpp"

#include <cassert>
#include <cmath>

namespace xfg::kernels::scalar {

namespace {

constexpr std::size_t kBlock = 16;

double pairwise_dot(const double* a, const double* b, std::size_t n) {
  if (n <= kBlock) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_dot(a, b, half) + pairwise_dot(a + half, b + half, n - half);
}

double pairwise_sum(const double* a, std::size_t n) {
  if (n <= kBlock) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(a, half) + pairwise_sum(a + half, n - half);
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return pairwise_dot(a.data(), b.data(), a.size());
}

double sum(std::span<const double> a) { return pairwise_sum(a.data(), a.size()); }

double max_abs(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::fmax(m, std::fabs(v));
  return m;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = y[i] + alpha * x[i];
}

void xpay(std::span<const double> x, double beta, std::span<double> y) {
  assert(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + beta * y[i];
}

void gradient_row(const CornerRows& corners, std::size_t cells,
                  std::span<const double> inv_spacing, double* const* out) {
  const int dim = corners.dim;
  const int nrows = 1 << (dim - 1);
  const double avg = 1.0 / static_cast<double>(nrows);

  double scale[3];
  for (int d = 0; d < dim; ++d) scale[d] = avg * inv_spacing[d];

  for (std::size_t i = 0; i < cells; ++i) {
    double diff = 0.0;
    double pair[4];
    for (int k = 0; k < nrows; ++k) {
      const double* r = corners.rows[k];
      diff = diff + (r[i + 1] - r[i]);
      pair[k] = r[i] + r[i + 1];
    }
    out[0][i] = diff * scale[0];
    for (int d = 1; d < dim; ++d) {
      const int bit = 1 << (d - 1);
      double plus = 0.0;
      double minus = 0.0;
      for (int k = 0; k < nrows; ++k) {
        if (k & bit)
          plus = plus + pair[k];
        else
          minus = minus + pair[k];
      }
      out[d][i] = (plus - minus) * scale[d];
    }
  }
}

}  // namespace xfg::kernels::scalar
