// Compiled with -mavx2.  Nothing in here may run before avx2_supported() says so.
#include "xfg/kernels.hpp"

#include <immintrin.h>

#include <cassert>
#include <cmath>

namespace xfg::kernels::avx2 {

namespace {

constexpr std::size_t kBlock = 64;

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double block_dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4)));
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double block_sum(const double* a, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(a + i));
    acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(a + i + 4));
  }
  for (; i + 4 <= n; i += 4) acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(a + i));
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i];
  return s;
}

double pairwise_dot(const double* a, const double* b, std::size_t n) {
  if (n <= kBlock) return block_dot(a, b, n);
  const std::size_t half = n / 2;
  return pairwise_dot(a, b, half) + pairwise_dot(a + half, b + half, n - half);
}

double pairwise_sum(const double* a, std::size_t n) {
  if (n <= kBlock) return block_sum(a, n);
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
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d m = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= a.size(); i += 4)
    m = _mm256_max_pd(m, _mm256_andnot_pd(sign, _mm256_loadu_pd(a.data() + i)));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, m);
  double r = std::fmax(std::fmax(lanes[0], lanes[1]), std::fmax(lanes[2], lanes[3]));
  for (; i < a.size(); ++i) r = std::fmax(r, std::fabs(a[i]));
  return r;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= x.size(); i += 4) {
    const __m256d vy = _mm256_loadu_pd(y.data() + i);
    const __m256d vx = _mm256_loadu_pd(x.data() + i);
    _mm256_storeu_pd(y.data() + i, _mm256_add_pd(vy, _mm256_mul_pd(va, vx)));
  }
  for (; i < x.size(); ++i) y[i] = y[i] + alpha * x[i];
}

void xpay(std::span<const double> x, double beta, std::span<double> y) {
  assert(x.size() == y.size());
  const __m256d vb = _mm256_set1_pd(beta);
  std::size_t i = 0;
  for (; i + 4 <= x.size(); i += 4) {
    const __m256d vy = _mm256_loadu_pd(y.data() + i);
    const __m256d vx = _mm256_loadu_pd(x.data() + i);
    _mm256_storeu_pd(y.data() + i, _mm256_add_pd(vx, _mm256_mul_pd(vb, vy)));
  }
  for (; i < x.size(); ++i) y[i] = x[i] + beta * y[i];
}

void gradient_row(const CornerRows& corners, std::size_t cells,
                  std::span<const double> inv_spacing, double* const* out) {
  const int dim = corners.dim;
  const int nrows = 1 << (dim - 1);
  const double avg = 1.0 / static_cast<double>(nrows);

  double scale[3];
  __m256d vscale[3];
  for (int d = 0; d < dim; ++d) {
    scale[d] = avg * inv_spacing[d];
    vscale[d] = _mm256_set1_pd(scale[d]);
  }

  std::size_t i = 0;
  for (; i + 4 <= cells; i += 4) {
    __m256d diff = _mm256_setzero_pd();
    __m256d pair[4];
    for (int k = 0; k < nrows; ++k) {
      const double* r = corners.rows[k];
      const __m256d left = _mm256_loadu_pd(r + i);
      const __m256d right = _mm256_loadu_pd(r + i + 1);
      diff = _mm256_add_pd(diff, _mm256_sub_pd(right, left));
      pair[k] = _mm256_add_pd(left, right);
    }
    _mm256_storeu_pd(out[0] + i, _mm256_mul_pd(diff, vscale[0]));
    for (int d = 1; d < dim; ++d) {
      const int bit = 1 << (d - 1);
      __m256d plus = _mm256_setzero_pd();
      __m256d minus = _mm256_setzero_pd();
      for (int k = 0; k < nrows; ++k) {
        if (k & bit)
          plus = _mm256_add_pd(plus, pair[k]);
        else
          minus = _mm256_add_pd(minus, pair[k]);
      }
      _mm256_storeu_pd(out[d] + i, _mm256_mul_pd(_mm256_sub_pd(plus, minus), vscale[d]));
    }
  }

  if (i < cells) {
    CornerRows tail = corners;
    for (int k = 0; k < nrows; ++k) tail.rows[k] = corners.rows[k] + i;
    double* tail_out[3];
    for (int d = 0; d < dim; ++d) tail_out[d] = out[d] + i;
    scalar::gradient_row(tail, cells - i, inv_spacing, tail_out);
  }
}

}  // namespace xfg::kernels::avx2
