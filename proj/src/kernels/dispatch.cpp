#include <atomic>
#include <cstdlib>
#include <cstring>

#include "xfg/kernels.hpp"

namespace xfg::kernels {

namespace {

Backend detect() {
  if (const char* env = std::getenv("XFG_SIMD"); env != nullptr && std::strcmp(env, "scalar") == 0)
    return Backend::scalar;
  return avx2_supported() ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend>& backend_slot() {
  static std::atomic<Backend> slot{detect()};
  return slot;
}

bool use_avx2() {
#if defined(XFG_HAVE_AVX2)
  return backend_slot().load(std::memory_order_relaxed) == Backend::avx2;
#else
  return false;
#endif
}

}  // namespace

bool avx2_supported() {
#if defined(XFG_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  static const bool supported = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") != 0;
  }();
  return supported;
#else
  return false;
#endif
}

Backend active_backend() { return backend_slot().load(std::memory_order_relaxed); }

void set_backend(Backend backend) {
  if (backend == Backend::avx2 && !avx2_supported()) backend = Backend::scalar;
  backend_slot().store(backend, std::memory_order_relaxed);
}

std::string_view backend_name(Backend backend) {
  return backend == Backend::avx2 ? "avx2" : "scalar";
}

#if defined(XFG_HAVE_AVX2)
#define XFG_DISPATCH(call) return use_avx2() ? avx2::call : scalar::call
#else
#define XFG_DISPATCH(call) return scalar::call
#endif

double dot(std::span<const double> a, std::span<const double> b) { XFG_DISPATCH(dot(a, b)); }
double sum(std::span<const double> a) { XFG_DISPATCH(sum(a)); }
double max_abs(std::span<const double> a) { XFG_DISPATCH(max_abs(a)); }
void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  XFG_DISPATCH(axpy(alpha, x, y));
}
void xpay(std::span<const double> x, double beta, std::span<double> y) {
  XFG_DISPATCH(xpay(x, beta, y));
}
void gradient_row(const CornerRows& corners, std::size_t cells,
                  std::span<const double> inv_spacing, double* const* out) {
  XFG_DISPATCH(gradient_row(corners, cells, inv_spacing, out));
}

#undef XFG_DISPATCH

}  // namespace xfg::kernels
