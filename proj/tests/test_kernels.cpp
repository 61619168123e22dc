#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "xfg/kernels.hpp"

namespace k = xfg::kernels;

namespace {

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

const std::size_t kSizes[] = {0, 1, 3, 4, 5, 7, 8, 15, 16, 17, 63, 64, 65, 1000, 4097};

}  // namespace

TEST(ScalarKernels, DotOfKnownVectors) {
  const std::vector<double> a{1, 2, 3};
  const std::vector<double> b{4, -5, 6};
  EXPECT_EQ(k::scalar::dot(a, b), 12.0);
}

TEST(ScalarKernels, SumOfIntegersIsExact) {
  std::vector<double> v(1000);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i + 1);
  EXPECT_EQ(k::scalar::sum(v), 500500.0);
}

TEST(ScalarKernels, MaxAbsPicksNegative) {
  const std::vector<double> v{0.5, -3.0, 2.0};
  EXPECT_EQ(k::scalar::max_abs(v), 3.0);
  EXPECT_EQ(k::scalar::max_abs(std::vector<double>{}), 0.0);
}

TEST(ScalarKernels, AxpyAndXpay) {
  std::vector<double> y{1, 1, 1};
  const std::vector<double> x{1, 2, 3};
  k::scalar::axpy(2.0, x, y);
  EXPECT_EQ(y, (std::vector<double>{3, 5, 7}));
  k::scalar::xpay(x, -1.0, y);
  EXPECT_EQ(y, (std::vector<double>{-2, -3, -4}));
}

TEST(ScalarKernels, GradientRowOfLinearFieldIn2D) {
  // u = 2 x + 3 y on nodes spaced hx = 0.5, hy = 0.25
  const std::size_t cells = 4;
  std::vector<double> r0(cells + 1), r1(cells + 1);
  for (std::size_t i = 0; i <= cells; ++i) {
    r0[i] = 2.0 * 0.5 * static_cast<double>(i);
    r1[i] = r0[i] + 3.0 * 0.25;
  }
  k::CornerRows rows;
  rows.rows[0] = r0.data();
  rows.rows[1] = r1.data();
  rows.dim = 2;
  std::vector<double> gx(cells), gy(cells);
  double* out[] = {gx.data(), gy.data()};
  const std::vector<double> inv{2.0, 4.0};
  k::scalar::gradient_row(rows, cells, inv, out);
  for (std::size_t i = 0; i < cells; ++i) {
    EXPECT_DOUBLE_EQ(gx[i], 2.0);
    EXPECT_DOUBLE_EQ(gy[i], 3.0);
  }
}

#if defined(XFG_HAVE_AVX2)

class Avx2Equivalence : public ::testing::TestWithParam<std::size_t> {
 protected:
  void SetUp() override {
    if (!k::avx2_supported()) GTEST_SKIP() << "CPU lacks AVX2";
  }
};

TEST_P(Avx2Equivalence, ElementwiseKernelsAreBitIdentical) {
  const std::size_t n = GetParam();
  const auto x = random_vector(n, 11 + n);
  auto y1 = random_vector(n, 17 + n);
  auto y2 = y1;
  k::scalar::axpy(0.37, x, y1);
  k::avx2::axpy(0.37, x, y2);
  EXPECT_EQ(y1, y2);
  k::scalar::xpay(x, -1.3, y1);
  k::avx2::xpay(x, -1.3, y2);
  EXPECT_EQ(y1, y2);
}

TEST_P(Avx2Equivalence, ReductionsAgreeToRoundoff) {
  const std::size_t n = GetParam();
  const auto a = random_vector(n, 3 + n);
  const auto b = random_vector(n, 5 + n);
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) scale += std::fabs(a[i] * b[i]);
  EXPECT_NEAR(k::scalar::dot(a, b), k::avx2::dot(a, b), 1e-14 * (1.0 + scale));
  double mass = 0.0;
  for (double v : a) mass += std::fabs(v);
  EXPECT_NEAR(k::scalar::sum(a), k::avx2::sum(a), 1e-14 * (1.0 + mass));
  EXPECT_EQ(k::scalar::max_abs(a), k::avx2::max_abs(a));
}

TEST_P(Avx2Equivalence, GradientRowIsBitIdentical) {
  const std::size_t cells = GetParam();
  for (int dim = 1; dim <= 3; ++dim) {
    const int nrows = 1 << (dim - 1);
    std::vector<std::vector<double>> data;
    k::CornerRows rows;
    rows.dim = dim;
    for (int r = 0; r < nrows; ++r) {
      data.push_back(random_vector(cells + 1, 100 * static_cast<std::uint64_t>(dim) + static_cast<std::uint64_t>(r)));
    }
    for (int r = 0; r < nrows; ++r) rows.rows[r] = data[static_cast<std::size_t>(r)].data();
    const std::vector<double> inv{3.0, 5.0, 7.0};
    std::vector<std::vector<double>> o1(3, std::vector<double>(cells)), o2 = o1;
    double* p1[] = {o1[0].data(), o1[1].data(), o1[2].data()};
    double* p2[] = {o2[0].data(), o2[1].data(), o2[2].data()};
    k::scalar::gradient_row(rows, cells, std::span<const double>(inv).first(static_cast<std::size_t>(dim)), p1);
    k::avx2::gradient_row(rows, cells, std::span<const double>(inv).first(static_cast<std::size_t>(dim)), p2);
    EXPECT_EQ(o1, o2) << "dim " << dim;
  }
}

INSTANTIATE_TEST_SUITE_P(Sizes, Avx2Equivalence, ::testing::ValuesIn(kSizes));

#endif

TEST(Dispatch, SetBackendRoundTrips) {
  const auto before = k::active_backend();
  k::set_backend(k::Backend::scalar);
  EXPECT_EQ(k::active_backend(), k::Backend::scalar);
  k::set_backend(k::Backend::avx2);
  EXPECT_EQ(k::active_backend(), k::avx2_supported() ? k::Backend::avx2 : k::Backend::scalar);
  k::set_backend(before);
  EXPECT_EQ(k::backend_name(k::Backend::avx2), "avx2");
}

TEST(Dispatch, ForwardsToSelectedBackend) {
  const auto a = random_vector(257, 9);
  const auto before = k::active_backend();
  k::set_backend(k::Backend::scalar);
  EXPECT_EQ(k::dot(a, a), k::scalar::dot(a, a));
  k::set_backend(before);
}
