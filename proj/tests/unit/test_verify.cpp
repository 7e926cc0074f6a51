#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "lakevort/branch.hpp"
#include "lakevort/error.hpp"
#include "lakevort/verify.hpp"

using namespace lakevort;

TEST(LogIdentity, ClosedForms) {
  EXPECT_NEAR(log_identity_closed_form(1, 1.0, 1.0, 0.0), -0.5, 1e-15);
  EXPECT_NEAR(log_identity_closed_form(2, 1.0, 1.0, 0.25 * std::numbers::pi), 0.0, 1e-15);
  EXPECT_NEAR(log_identity_closed_form(3, 0.4, 1.0, 0.0), -0.0106666666666667, 1e-15);
}

TEST(LogIdentity, QuadratureConverges) {
  for (int n : {1, 4, 12})
    for (double x : {0.2, 0.9}) {
      const std::size_t nodes = log_identity_nodes(n, x, 1.0, 0.7, 1e-12);
      EXPECT_LE(log_identity_error(n, x, 1.0, 0.7, nodes), 1e-10) << n << ' ' << x;
    }
  EXPECT_GT(log_identity_error(8, 0.9, 1.0, 0.0, 8), 1e-3);
}

TEST(FdSolver, ConstantDepthDiscIsSecondOrder) {
  const DepthProfile p = DepthProfile::constant(1.0);
  const FourierContour disc(1.0, 1);
  const auto exact = [](double x, double y) {
    const double r = std::hypot(x, y);
    return r < 1.0 ? -0.25 * r * r : -0.25 - 0.5 * std::log(r);
  };
  std::vector<double> errors;
  for (std::size_t n : {65, 129, 257}) {
    const Grid2D grid(2.0, n);
    const Field2D psi = fd_solve_2d(p, patch_source(grid, p, disc), exact);
    double err = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) err = std::max(err, std::abs(psi.at(i, j) - exact(grid.coord(i), grid.coord(j))));
    errors.push_back(err);
  }
  EXPECT_LT(errors[2], errors[0]);
  EXPECT_GT(std::log2(errors[0] / errors[2]) / 2.0, 1.6);
}

TEST(FdSolver, PatchSourceMass) {
  const DepthProfile p = make_bump_profile(1.0, 0.5, 2.0);
  const FourierContour outer(1.0, 3, {0.05});
  const FourierContour inner(0.4, 3);
  const Grid2D grid(2.0, 129);
  // Mass of b over the annulus, from the radial moment and the perturbation average.
  const Field2D full = patch_source(grid, p, outer);
  const Field2D ring = patch_source(grid, p, outer, &inner);
  const Field2D hole = patch_source(grid, p, inner);
  EXPECT_NEAR(full.integral() - ring.integral(), hole.integral(), 1e-12);
  EXPECT_NEAR(hole.integral(), 2.0 * std::numbers::pi * radial_moment(p, 0.0, 0.4), 1e-10);
}

TEST(SelfAdjoint, IdenticalSourcesGiveZero) {
  const DepthProfile p = make_bump_profile(1.0, 0.5, 2.0);
  const CompactSource w = unit_bump(0.3, -0.2, 0.7);
  EXPECT_NEAR(self_adjointness_check(p, w, w, Grid2D(4.0, 65)), 0.0, 1e-14);
}

TEST(SelfAdjoint, RequiresUnitMass) {
  const DepthProfile p = DepthProfile::constant(1.0);
  CompactSource w = unit_bump(0.0, 0.0, 0.5);
  const auto f = w.f;
  w.f = [f](double x, double y) { return 2.0 * f(x, y); };
  EXPECT_THROW(self_adjointness_check(p, w, unit_bump(0.1, 0.0, 0.5), Grid2D(4.0, 33)), ConfigError);
}

TEST(Decomposition, IsLinearAndAccurate) {
  const DepthProfile p = make_bump_profile(1.0, 0.5, 2.0);
  const std::vector<double> radii{2.5, 0.3, 0.9, 1.5, 3.0};
  const auto disc = [](double r) { return r < 1.0 ? 1.0 : 0.0; };
  const auto twice = [](double r) { return r < 1.0 ? 2.0 : 0.0; };
  EXPECT_LE(decomposition_check(p, disc, 1.0, radii), 1e-8);
  EXPECT_LE(decomposition_check(p, twice, 1.0, radii), 2e-8);
}

TEST(RigidRotation, DiscAndUnconvergedState) {
  const DepthProfile p = DepthProfile::constant(1.0);
  const PatchEvaluator ev(p, 3.0);
  BranchStep disc;
  disc.omega = 0.3;
  disc.outer = FourierContour(1.0, 3, std::vector<double>(4, 0.0));
  EXPECT_LE(rigid_rotation_check(ev, disc, 1.0, 0.1, 24).deviation, 1e-10);

  BranchStep wrong = disc;
  wrong.outer = FourierContour(1.0, 3, {0.05, 0.0, 0.0, 0.0});
  wrong.omega = 0.0;
  EXPECT_GE(rigid_rotation_check(ev, wrong, 1.0, 0.1, 24).deviation, 1e-3);
}

TEST(Suite, UnknownSelectorIsRejected) {
  SuiteOptions o;
  o.selector = "nonsense";
  EXPECT_THROW(run_verify_suite(DepthProfile::constant(1.0), o), ConfigError);
  EXPECT_EQ(suite_checks().size(), 5u);
}

TEST(Suite, LogIdentityCheckHonoursQuadTol) {
  SuiteOptions o;
  o.selector = "log-identity";
  const auto good = run_verify_suite(DepthProfile::constant(1.0), o);
  ASSERT_EQ(good.size(), 1u);
  EXPECT_TRUE(good[0].pass);
  o.quad_tol = 1.0;
  const auto bad = run_verify_suite(DepthProfile::constant(1.0), o);
  EXPECT_FALSE(bad[0].pass);
  EXPECT_FALSE(suite_report(bad).at("pass").get<bool>());
}
