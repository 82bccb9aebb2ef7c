#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "msir/simd/kernels.hpp"
#include "test_support.hpp"

using msir::simd::KernelTable;

namespace {

std::vector<double> random_vector(std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = msir::testing::gauss();
  return v;
}

class SimdEquivalence : public ::testing::Test {
 protected:
  void SetUp() override {
    vec_ = msir::simd::avx2_kernels();
    if (!vec_) GTEST_SKIP() << "AVX2/FMA variant not available on this build or CPU";
  }
  const KernelTable& ref_ = msir::simd::scalar_kernels();
  const KernelTable* vec_ = nullptr;
};

}  // namespace

TEST(SimdDispatch, ActiveTableIsOneOfTheVariants) {
  const auto& active = msir::simd::active();
  EXPECT_TRUE(active.name == "scalar" || active.name == "avx2");
}

TEST(SimdScalar, DotAndDistanceOnKnownValues) {
  const auto& k = msir::simd::scalar_kernels();
  const double x[] = {1, 2, 3};
  const double y[] = {4, -5, 6};
  EXPECT_DOUBLE_EQ(k.dot(x, y, 3), 12.0);
  EXPECT_DOUBLE_EQ(k.squared_distance(x, y, 3), 9.0 + 49.0 + 9.0);
}

TEST(SimdScalar, RotateIsOrthogonal) {
  const auto& k = msir::simd::scalar_kernels();
  double x[] = {1.0, 0.0};
  double y[] = {0.0, 1.0};
  const double c = std::cos(0.3);
  const double s = std::sin(0.3);
  k.rotate(x, y, c, s, 2);
  EXPECT_NEAR(x[0] * x[0] + y[0] * y[0], 1.0, 1e-15);
  EXPECT_NEAR(x[0], c, 1e-15);
  EXPECT_NEAR(y[0], s, 1e-15);
  EXPECT_NEAR(x[1], -s, 1e-15);
}

TEST_F(SimdEquivalence, DotMatchesScalar) {
  for (std::size_t n = 0; n < 70; ++n) {
    const auto x = random_vector(n);
    const auto y = random_vector(n);
    const double r = ref_.dot(x.data(), y.data(), n);
    EXPECT_NEAR(vec_->dot(x.data(), y.data(), n), r, 1e-13 * (1.0 + std::abs(r) + n)) << "n=" << n;
  }
}

TEST_F(SimdEquivalence, SquaredDistanceMatchesScalar) {
  for (std::size_t n = 0; n < 70; ++n) {
    const auto x = random_vector(n);
    const auto y = random_vector(n);
    const double r = ref_.squared_distance(x.data(), y.data(), n);
    EXPECT_NEAR(vec_->squared_distance(x.data(), y.data(), n), r, 1e-13 * (1.0 + r));
  }
}

TEST_F(SimdEquivalence, AxpyScaleRotateMatchScalar) {
  for (std::size_t n = 0; n < 70; ++n) {
    const auto x = random_vector(n);
    const auto y = random_vector(n);
    const double alpha = msir::testing::gauss();

    auto ya = y, yb = y;
    ref_.axpy(alpha, x.data(), ya.data(), n);
    vec_->axpy(alpha, x.data(), yb.data(), n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(ya[i], yb[i], 1e-14 * (1.0 + std::abs(ya[i])));

    auto sa = x, sb = x;
    ref_.scale(alpha, sa.data(), n);
    vec_->scale(alpha, sb.data(), n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(sa[i], sb[i]);

    auto xa = x, xb = x, ra = y, rb = y;
    const double c = std::cos(alpha);
    const double s = std::sin(alpha);
    ref_.rotate(xa.data(), ra.data(), c, s, n);
    vec_->rotate(xb.data(), rb.data(), c, s, n);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_NEAR(xa[i], xb[i], 1e-14 * (1.0 + std::abs(xa[i])));
      EXPECT_NEAR(ra[i], rb[i], 1e-14 * (1.0 + std::abs(ra[i])));
    }
  }
}

TEST_F(SimdEquivalence, UnalignedOffsetsAgree) {
  const auto x = random_vector(131);
  const auto y = random_vector(131);
  for (std::size_t off = 0; off < 4; ++off) {
    const std::size_t n = 127;
    const double r = ref_.dot(x.data() + off, y.data() + off, n);
    EXPECT_NEAR(vec_->dot(x.data() + off, y.data() + off, n), r, 1e-12);
  }
}
