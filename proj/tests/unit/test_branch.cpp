#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lakevort/branch.hpp"
#include "lakevort/error.hpp"

using namespace lakevort;

namespace {

BranchOptions small_branch(double s_max, double ds) {
  BranchOptions o;
  o.s_max = s_max;
  o.ds = ds;
  o.K = 12;
  return o;
}

}  // namespace

TEST(Branch, KirchhoffEllipse) {
  const PatchEvaluator ev(DepthProfile::constant(1.0), 3.0);
  const VStateBranch br = continue_simply(ev, 1.0, 2, small_branch(0.05, 0.025));
  ASSERT_FALSE(br.truncated) << br.diagnostic;
  ASSERT_EQ(br.steps.size(), 3u);
  const BranchStep& last = br.steps.back();
  EXPECT_NEAR(last.s, 0.05, 1e-15);
  const double major = last.outer.radius(0.0);
  const double minor = last.outer.radius(0.5 * std::numbers::pi);
  const double lambda = std::min(major, minor) / std::max(major, minor);
  const double kirchhoff = lambda / ((1.0 + lambda) * (1.0 + lambda));
  EXPECT_LE(std::abs(last.omega - kirchhoff) / kirchhoff, 1e-3);
  EXPECT_LE(last.residual_inf, 1e-9);
  EXPECT_NEAR(br.omega_extrapolated, 0.25, 1e-6);
}

TEST(Branch, ZeroAmplitudeIsTheDisc) {
  const PatchEvaluator ev(make_bump_profile(1.0, 0.5, 2.0), 3.0);
  const VStateBranch br = continue_simply(ev, 1.0, 3, small_branch(0.0, 0.02));
  ASSERT_EQ(br.steps.size(), 1u);
  EXPECT_DOUBLE_EQ(br.steps[0].omega, br.omega_bifurcation);
  EXPECT_LE(br.steps[0].residual_fine, 1e-12);
}

TEST(Branch, ResidualDetectsCorruptedState) {
  const PatchEvaluator ev(DepthProfile::constant(1.0), 3.0);
  const VStateBranch br = continue_simply(ev, 1.0, 3, small_branch(0.04, 0.02));
  ASSERT_FALSE(br.truncated) << br.diagnostic;
  BranchStep bad = br.steps.back();
  std::vector<double> c = bad.outer.coeffs();
  c[1] += 1e-3;
  bad.outer = FourierContour(1.0, 3, c);
  EXPECT_LE(residual_report(ev, br.steps.back(), 2), 1e-8);
  EXPECT_GE(residual_report(ev, bad, 2), 1e-5);
}

TEST(Branch, OmegaIsEvenInAmplitude) {
  const PatchEvaluator ev(make_bump_profile(1.0, 0.5, 2.0), 3.0);
  const BranchOptions o = small_branch(0.03, 0.03);
  const VStateBranch br = continue_simply(ev, 1.0, 3, o);
  ASSERT_FALSE(br.truncated) << br.diagnostic;
  const BranchStep& up = br.steps.back();
  std::vector<double> guess = up.outer.coeffs();
  for (std::size_t k = 0; k < guess.size(); k += 2) guess[k] = -guess[k];
  const BranchStep down = solve_simply(ev, 1.0, 3, -0.03, up.omega, guess, o);
  EXPECT_NEAR(down.omega, up.omega, 1e-9);
}

TEST(Branch, RejectsBadOptions) {
  const PatchEvaluator ev(DepthProfile::constant(1.0), 3.0);
  BranchOptions o = small_branch(0.1, 0.0);
  EXPECT_THROW(continue_simply(ev, 1.0, 2, o), ConfigError);
  EXPECT_THROW(continue_simply(ev, -1.0, 2, small_branch(0.1, 0.02)), ConfigError);
}

TEST(Branch, AnnulusBranchStartsAtItsBifurcation) {
  const PatchEvaluator ev(DepthProfile::constant(1.0), 3.0);
  const VStateBranch br = continue_doubly(ev, 1.0, 0.4, 3, Branch::plus, small_branch(0.02, 0.01));
  ASSERT_FALSE(br.truncated) << br.diagnostic;
  EXPECT_NEAR(br.omega_bifurcation, 0.252, 1e-8);
  EXPECT_NEAR(br.omega_extrapolated, 0.252, 1e-5);
  for (const BranchStep& st : br.steps) {
    ASSERT_TRUE(st.inner.has_value());
    EXPECT_TRUE(nested(st.outer, *st.inner));
    EXPECT_LE(st.residual_inf, 1e-9);
  }
  EXPECT_NEAR(br.kernel.norm(), 1.0, 1e-14);
}
