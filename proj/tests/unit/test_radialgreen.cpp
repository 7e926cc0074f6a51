#include <gtest/gtest.h>

#include <cmath>

#include "lakevort/depth.hpp"
#include "lakevort/mode_green.hpp"
#include "lakevort/radial.hpp"

using namespace lakevort;

namespace {

double disc_mode_zero(double r) { return r < 1.0 ? -0.25 * r * r : -0.25 - 0.5 * std::log(r); }

/// Mode-n response of b = 1 to the unit disc source, at alpha < 1.
double disc_mode_n(int n, double alpha) {
  const double inner = alpha * alpha / (n + 2);
  const double outer = n == 2 ? alpha * alpha * std::log(1.0 / alpha)
                              : std::pow(alpha, n) * (1.0 - std::pow(alpha, 2 - n)) / (2 - n);
  return (inner + outer) / (2.0 * n);
}

}  // namespace

TEST(RadialGreen, ModeZeroDiscClosedForm) {
  const DepthProfile p = DepthProfile::constant(1.0);
  const RadialGrid grid = RadialGrid::for_profile(p, 3.0, 2048);
  const RadialFunction psi = solve_mode_zero(p, RadialSource{[](double r) { return r < 1.0 ? 1.0 : 0.0; }, {1.0}}, grid);
  for (double r : {0.1, 0.5, 0.99, 1.0, 1.5, 2.7}) EXPECT_NEAR(psi(r), disc_mode_zero(r), r == 1.0 ? 1e-7 : 1e-10) << "r = " << r;
}

TEST(RadialGreen, ConstantDepthGreenIsPowerLaw) {
  const DepthProfile p = DepthProfile::constant(1.0);
  const RadialGrid grid = RadialGrid::for_profile(p, 2.0, 2048);
  for (int n : {1, 2, 5, 16, 32}) {
    const ModeGreen mg = homogeneous_pair(p, n, grid);
    EXPECT_LE(mg.abel_deviation(), 1e-8);
    for (auto [a, b] : {std::pair{1.0, 1.0}, {1.0, 0.4}, {0.6, 1.4}}) {
      const double expect = std::pow(std::min(a / b, b / a), n) / (2.0 * n);
      EXPECT_NEAR(green_lambda(mg, a, b), expect, 1e-9 * expect) << "n = " << n;
    }
  }
}

TEST(RadialGreen, GreenIsSymmetricForBump) {
  const DepthProfile p = make_bump_profile(1.0, 0.5, 2.0);
  const RadialGrid grid = RadialGrid::for_profile(p, 2.0, 2048);
  const ModeGreen mg = homogeneous_pair(p, 3, grid);
  EXPECT_LE(mg.abel_deviation(), 1e-8);
  EXPECT_NEAR(mg.green(0.6, 1.4), mg.green(1.4, 0.6), 1e-14);
  EXPECT_GT(mg.green(1.0, 1.0), 0.0);
}

TEST(RadialGreen, ModeNDiscSourceClosedForm) {
  const DepthProfile p = DepthProfile::constant(1.0);
  const RadialGrid grid = RadialGrid::for_profile(p, 2.0, 2048);
  for (int n : {1, 2, 3, 6}) {
    const ModeGreen mg = homogeneous_pair(p, n, grid);
    const RadialFunction u = solve_mode_n(mg, RadialSource{[](double r) { return r < 1.0 ? 1.0 : 0.0; }, {1.0}});
    for (double alpha : {0.25, 0.5, 0.8}) EXPECT_NEAR(u(alpha), disc_mode_n(n, alpha), 1e-9) << "n = " << n;
  }
  EXPECT_NEAR(disc_mode_n(3, 0.5), 0.0291666666666667, 1e-13);
}

TEST(RadialGreen, ModeZeroMatchesGreenIdentityForBump) {
  const DepthProfile p = make_bump_profile(1.0, 0.5, 2.0);
  const RadialGrid grid = RadialGrid::for_profile(p, 2.0, 4096);
  const auto source = [](double r) { return r < 1.0 ? 1.0 : 0.0; };
  const RadialFunction psi = solve_mode_zero(p, RadialSource{source, {1.0}}, grid);
  // psi' = -(b / r) int_0^r tau f = -(b / r) r^2 / 2 inside the disc.
  for (double r : {0.2, 0.6, 0.9}) EXPECT_NEAR(psi.derivative(r), -0.5 * p(r) * r, 1e-8);
  for (double r : {1.3, 2.5}) EXPECT_NEAR(psi.derivative(r), -0.5 * p(r) / r, 1e-8);
}
