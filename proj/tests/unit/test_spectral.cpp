#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "lakevort/error.hpp"
#include "lakevort/spectral.hpp"

using namespace lakevort;

namespace {

const DepthProfile kFlat = DepthProfile::constant(1.0);
const DepthProfile kBump = make_bump_profile(1.0, 0.5, 2.0);

}  // namespace

TEST(Spectral, MinRatio) {
  EXPECT_DOUBLE_EQ(min_ratio(1.0, 0.4), 0.4);
  EXPECT_DOUBLE_EQ(min_ratio(0.4, 1.0), 0.4);
  EXPECT_DOUBLE_EQ(min_ratio(0.7, 0.7), 1.0);
}

TEST(Spectral, UnIntegralClosedForms) {
  const auto one = [](double) { return 1.0; };
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_NEAR(u_n_integral(one, inf, 1, 1.0, 1.0), 4.0 / 3.0, 1e-10);
  EXPECT_NEAR(u_n_integral(one, inf, 2, 1.0, 2.0), 0.25 * (1.0 + 0.2 + 2.0 / 3.0), 1e-10);
  EXPECT_DOUBLE_EQ(u_n_integral(kFlat, 3, 1.0, 0.5), 0.0);
}

TEST(Spectral, ConstantDepthLambda) {
  const SpectralContext ctx(kFlat, {1.0, 0.4});
  for (int n = 1; n <= 32; ++n) {
    EXPECT_NEAR(ctx.lambda(n, 1.0, 1.0), 0.5 / n, 1e-9 / n);
    const double off = std::pow(0.4, n) / (2.0 * n);
    EXPECT_NEAR(ctx.lambda(n, 1.0, 0.4), off, 1e-8 * off);
    EXPECT_NEAR(ctx.f(n, 1.0, 0.4), 0.0, 1e-10);
  }
  EXPECT_NEAR(ctx.lambda(3, 1.0, 0.4), 0.0106666666666667, 1e-12);
}

TEST(Spectral, LambdaIsSymmetric) {
  const SpectralContext ctx(kBump, {0.6, 1.4});
  for (int n : {1, 3, 9}) EXPECT_NEAR(ctx.lambda(n, 0.6, 1.4), ctx.lambda(n, 1.4, 0.6), 1e-14);
}

TEST(Spectral, RoutesAgreeForBump) {
  const SpectralContext ctx(kBump, {0.6, 1.0, 1.4});
  for (int n : {1, 4, 17, 40})
    for (double a : {0.6, 1.0, 1.4})
      for (double b : {0.6, 1.4}) EXPECT_LE(ctx.route_difference(n, a, b), 1e-5) << n << ' ' << a << ' ' << b;
}

TEST(Spectral, FnVanishesForConstantDepth) {
  const SpectralContext ctx(kFlat, {1.0});
  for (int n : {1, 5, 20}) EXPECT_NEAR(ctx.f(n, 1.0, 1.0, LambdaRoute::fixedpoint), 0.0, 1e-14);
}

TEST(Spectral, FnBoundHolds) {
  const SpectralContext ctx(kBump, {0.6, 1.0, 1.4});
  for (int n = ctx.contraction_mode(1.4, 1.4); n <= 24; ++n)
    for (double a : {0.6, 1.0, 1.4})
      for (double b : {0.6, 1.0, 1.4}) EXPECT_LE(std::abs(ctx.f(n, a, b)), fn_bound(kBump, n, a, b));
}

TEST(Spectral, LambdaLargeModeLimit) {
  const SpectralContext ctx(kBump, {1.0});
  EXPECT_NEAR(2.0 * 200 * ctx.lambda(200, 1.0, 1.0), kBump(1.0), 1e-4);
}

TEST(Spectral, ThresholdM) {
  EXPECT_DOUBLE_EQ(threshold_M(kFlat, 1.0, 1.0), 0.0);
  const double expect = 16.0 * 2.0 * kBump.theta_sup() * std::max(1.0, 1.0 / std::sqrt(kBump(1.0)));
  EXPECT_NEAR(threshold_M(kBump, 1.0, 1.0), expect, 1e-14);
  EXPECT_LT(threshold_M(make_bump_profile(1.0, 1e-6, 2.0), 1.0, 1.0), 1e-4);
}

TEST(Spectral, PositivityAndMonotonicityAboveThreshold) {
  const SpectralContext ctx(kBump, {1.0});
  const int first = static_cast<int>(std::floor(threshold_M(kBump, 1.0, 1.0))) + 1;
  double previous = ctx.lambda(first, 1.0, 1.0);
  EXPECT_GT(previous, 0.0);
  for (int n = first + 1; n <= first + 16; ++n) {
    const double value = ctx.lambda(n, 1.0, 1.0);
    EXPECT_GT(value, 0.0);
    EXPECT_LT(value, previous);
    previous = value;
  }
}

TEST(Spectral, EulerLimitVelocities) {
  for (double a : {0.5, 1.0, 2.0}) {
    const SpectralContext ctx(kFlat, {a});
    for (int m = 1; m <= 8; ++m) EXPECT_NEAR(omega_simply(ctx, a, m), (m - 1.0) / (2.0 * m), 1e-8);
  }
}

TEST(Spectral, AnnulusVelocities) {
  const SpectralContext ctx(kFlat, {1.0, 0.4});
  const DoublySpectrum s = omega_doubly(ctx, 1.0, 0.4, 3);
  EXPECT_NEAR(s.delta, 0.007056, 1e-12);
  EXPECT_NEAR(s.omega_minus, 0.168, 1e-9);
  EXPECT_NEAR(s.omega_plus, 0.252, 1e-9);
  EXPECT_LT(s.omega_minus, s.omega_plus);
}

TEST(Spectral, DegenerateAnnulusIsAnError) {
  const SpectralContext ctx(kFlat, {1.0, 0.5});
  EXPECT_THROW(omega_doubly(ctx, 1.0, 0.5, 3), DegenerateSpectrumError);
  EXPECT_GT(find_threshold_N(ctx, 1.0, 0.5).n, 3);
}

TEST(Spectral, MatrixMn) {
  const SpectralContext ctx(kFlat, {1.0, 0.4});
  EXPECT_NEAR(matrix_Mn(ctx, 0.0, 1.0, 0.4, 3).det, 0.168 * 0.252, 1e-12);
  const DoublySpectrum s = omega_doubly(ctx, 1.0, 0.4, 3);
  for (double omega : {s.omega_minus, s.omega_plus}) EXPECT_LE(std::abs(matrix_Mn(ctx, omega, 1.0, 0.4, 3).det), 1e-12);
  // det is a monic quadratic in Omega.
  const double d0 = matrix_Mn(ctx, 0.0, 1.0, 0.4, 3).det;
  const double d1 = matrix_Mn(ctx, 1.0, 1.0, 0.4, 3).det;
  const double dm = matrix_Mn(ctx, -1.0, 1.0, 0.4, 3).det;
  EXPECT_NEAR(0.5 * (d1 + dm) - d0, 1.0, 1e-12);
}

TEST(Spectral, KernelGenerator) {
  const SpectralContext ctx(kFlat, {1.0, 0.4});
  const Eigen::Vector2d v = kernel_generator(ctx, 1.0, 0.4, 3, Branch::plus);
  EXPECT_NEAR(v[0], 0.252 - 1.0 / 6.0, 1e-9);
  EXPECT_NEAR(v[1], -0.0106666666666667, 1e-9);
  for (Branch b : {Branch::minus, Branch::plus}) {
    const Eigen::Vector2d k = kernel_generator(ctx, 1.0, 0.4, 3, b);
    const double omega = b == Branch::plus ? 0.252 : 0.168;
    EXPECT_LE((matrix_Mn(ctx, omega, 1.0, 0.4, 3).matrix * k).norm(), 1e-9);
  }
}

TEST(Spectral, ThresholdNWindow) {
  const SpectralContext ctx(kFlat, {1.0, 0.4});
  const int n0 = find_threshold_N(ctx, 1.0, 0.4).n;
  double prev_minus = 0.0, prev_plus = 0.0;
  for (int n = n0; n <= n0 + 64; ++n) {
    const DoublySpectrum s = omega_doubly(ctx, 1.0, 0.4, n);
    EXPECT_GT(s.delta, 0.0);
    if (n > n0) {
      EXPECT_GT(s.omega_plus, prev_plus);
      EXPECT_LT(s.omega_minus, prev_minus);
    }
    prev_minus = s.omega_minus;
    prev_plus = s.omega_plus;
  }
}

TEST(Spectral, TableCsv) {
  const SpectralContext ctx(kFlat, {1.0, 0.4});
  const SpectralTable t = build_spectral_table(ctx, {1.0, 0.4}, 4, false);
  const std::string csv = t.to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "n,Lambda_a1a1,Lambda_a2a2,Lambda_a1a2,f_a1a1,f_a2a2,f_a1a2,route_rel_diff,Q,Omega_minus,Omega_plus,Delta");
  ASSERT_EQ(t.rows.size(), 4u);
  EXPECT_NEAR(t.rows[2].omega_plus, 0.252, 1e-9);
}
