#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <vector>

#include "lakevort/depth.hpp"
#include "lakevort/error.hpp"

using namespace lakevort;

namespace {

double bump_q(double b_inf, double amp, double r_inf, double a) {
  const double x = 1.0 - a * a / (r_inf * r_inf);
  return 0.5 * b_inf + amp * r_inf * r_inf * (1.0 - x * x * x * x) / (8.0 * a * a);
}

}  // namespace

TEST(Depth, ConstantProfileIsFlat) {
  const DepthProfile p = DepthProfile::constant(2.5);
  EXPECT_TRUE(p.is_constant());
  for (double r : {0.0, 0.3, 1.0, 7.0}) {
    EXPECT_DOUBLE_EQ(p(r), 2.5);
    EXPECT_DOUBLE_EQ(p.derivative(r), 0.0);
    EXPECT_DOUBLE_EQ(p.theta(r), 0.0);
  }
  EXPECT_DOUBLE_EQ(p.theta_sup(), 0.0);
}

TEST(Depth, BumpValuesAndPlateau) {
  const DepthProfile p = make_bump_profile(1.0, 0.5, 2.0);
  EXPECT_DOUBLE_EQ(p(0.0), 1.5);
  EXPECT_NEAR(p(1.0), 1.0 + 0.5 * std::pow(0.75, 3), 1e-15);
  EXPECT_DOUBLE_EQ(p(2.0), 1.0);
  EXPECT_DOUBLE_EQ(p(3.0), 1.0);
  EXPECT_NEAR(p.derivative(2.0 - 1e-9), 0.0, 1e-12);
  EXPECT_FALSE(p.is_constant());
}

TEST(Depth, BumpRejectsNonPositiveDepth) {
  EXPECT_THROW(make_bump_profile(1.0, -1.0, 2.0), ConfigError);
  EXPECT_THROW(make_bump_profile(1.0, -1.5, 2.0), ConfigError);
  EXPECT_NO_THROW(make_bump_profile(1.0, -0.9, 2.0));
  EXPECT_THROW(make_bump_profile(0.0, 0.1, 2.0), ConfigError);
}

TEST(Depth, ThetaMatchesFiniteDifferences) {
  const DepthProfile p = make_bump_profile(1.0, 0.5, 2.0);
  const auto inv_sqrt = [&](double r) { return 1.0 / std::sqrt(p(r)); };
  for (double r : {0.3, 0.9, 1.4, 1.8}) {
    const double h = 1e-4;
    const double d1 = (inv_sqrt(r + h) - inv_sqrt(r - h)) / (2 * h);
    const double d2 = (inv_sqrt(r + h) - 2 * inv_sqrt(r) + inv_sqrt(r - h)) / (h * h);
    EXPECT_NEAR(p.theta(r), d1 + r * d2, 1e-6) << "r = " << r;
  }
  EXPECT_DOUBLE_EQ(p.theta(2.5), 0.0);
  double sup = 0.0;
  for (int i = 0; i <= 4000; ++i) sup = std::max(sup, std::abs(p.theta(2.0 * i / 4000.0)));
  EXPECT_NEAR(p.theta_sup(), sup, 1e-3 * sup);
}

TEST(Depth, QFactorClosedForms) {
  const DepthProfile c = DepthProfile::constant(1.0);
  for (double a : {0.5, 1.0, 2.0}) EXPECT_NEAR(q_factor(c, a, 0.0), 0.5, 1e-14);
  EXPECT_NEAR(q_factor(c, 1.0, 0.4), 0.42, 1e-14);
  const DepthProfile p = make_bump_profile(1.0, 0.5, 2.0);
  for (double a : {0.5, 1.0, 1.7}) EXPECT_NEAR(q_factor(p, a, 0.0), bump_q(1.0, 0.5, 2.0, a), 1e-13);
  EXPECT_NEAR(q_factor(p, 1.0, 0.0), 0.6708984375, 1e-13);
}

TEST(Depth, TableReproducesSmoothProfile) {
  const DepthProfile bump = make_bump_profile(1.0, 0.5, 2.0);
  std::vector<std::array<double, 2>> samples;
  for (int i = 0; i <= 40; ++i) {
    const double r = 2.0 * i / 40.0;
    samples.push_back({r, bump(r)});
  }
  const DepthProfile t = DepthProfile::table(samples);
  EXPECT_DOUBLE_EQ(t.r_inf(), 2.0);
  EXPECT_DOUBLE_EQ(t.b_inf(), 1.0);
  for (double r : {0.0, 0.33, 1.01, 1.77, 2.5}) EXPECT_NEAR(t(r), bump(r), 2e-4) << "r = " << r;
}

TEST(Depth, TableValidation) {
  const std::vector<std::array<double, 2>> decreasing{{0.0, 1.0}, {1.0, 1.2}, {0.5, 1.0}};
  EXPECT_THROW(DepthProfile::table(decreasing), ConfigError);
  const std::vector<std::array<double, 2>> negative{{0.0, 1.0}, {1.0, -0.2}};
  EXPECT_THROW(DepthProfile::table(negative), ConfigError);
}

TEST(Depth, JsonRoundTrip) {
  const DepthProfile p = make_bump_profile(1.0, 0.5, 2.0);
  const DepthProfile q = DepthProfile::from_json(p.to_json());
  for (double r : {0.0, 0.7, 1.9, 3.0}) EXPECT_DOUBLE_EQ(p(r), q(r));
  EXPECT_THROW(DepthProfile::from_json({{"family", "spiral"}}), ConfigError);
  EXPECT_THROW(DepthProfile::from_json(nlohmann::json::array()), ConfigError);
}

TEST(Depth, RadialMoment) {
  const DepthProfile c = DepthProfile::constant(2.0);
  EXPECT_NEAR(radial_moment(c, 0.0, 1.0), 1.0, 1e-14);
  EXPECT_NEAR(radial_moment(c, 0.0, 1.0, 0.5), std::sqrt(2.0) / 2.0, 1e-14);
}
