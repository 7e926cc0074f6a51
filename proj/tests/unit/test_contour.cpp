#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "lakevort/contour.hpp"
#include "lakevort/error.hpp"
#include "lakevort/functional.hpp"
#include "lakevort/stream.hpp"

using namespace lakevort;

namespace {

double arc_length(const std::vector<Arc>& arcs) {
  double total = 0.0;
  for (const Arc& a : arcs) total += a.end - a.begin;
  return total;
}

}  // namespace

TEST(Contour, RadiusFromCoefficients) {
  const FourierContour c(1.0, 3, {0.05, 0.01});
  for (double t : {0.0, 0.4, 1.3}) {
    const double r2 = 1.0 + 2.0 * (0.05 * std::cos(3 * t) + 0.01 * std::cos(6 * t));
    EXPECT_NEAR(c.radius(t), std::sqrt(r2), 1e-15);
    const double h = 1e-5;
    EXPECT_NEAR(c.radius_derivatives(t)[1], (c.radius(t + h) - c.radius(t - h)) / (2 * h), 1e-8);
  }
  EXPECT_NEAR(c.max_radius(), std::sqrt(1.12), 1e-12);
  EXPECT_EQ(c.critical_angles().front(), 0.0);
  EXPECT_NEAR(c.critical_angles().back(), std::numbers::pi / 3, 1e-15);
}

TEST(Contour, NonGraphIsRejected) {
  const FourierContour bad(1.0, 2, {-0.6});
  EXPECT_FALSE(bad.is_graph());
  EXPECT_THROW(bad.validate(), GeometryError);
  EXPECT_THROW(FourierContour(0.0, 2), ConfigError);
  EXPECT_THROW(FourierContour(1.0, 0), ConfigError);
}

TEST(Contour, Nesting) {
  const FourierContour outer(1.0, 3, {0.05});
  EXPECT_TRUE(nested(outer, FourierContour(0.4, 3, {0.01})));
  EXPECT_FALSE(nested(outer, FourierContour(0.97, 3, {-0.05})));
}

TEST(Contour, ArcsAgreeWithSymmetry) {
  const FourierContour c(1.0, 4, {0.08, -0.01});
  for (double rho : {0.9, 0.97, 1.02, 1.06}) {
    const double fundamental = arc_length(c.arcs_fundamental(rho));
    EXPECT_NEAR(arc_length(c.arcs_full(rho)), 2 * 4 * fundamental, 1e-10) << "rho = " << rho;
  }
  EXPECT_NEAR(arc_length(c.arcs_fundamental(0.5)), std::numbers::pi / 4, 1e-15);
  EXPECT_EQ(c.arcs_fundamental(2.0).size(), 0u);
}

TEST(Contour, JsonRoundTrip) {
  const FourierContour c(1.3, 5, {0.02, 0.003});
  const FourierContour d = FourierContour::from_json(c.to_json());
  EXPECT_EQ(d.m(), 5);
  EXPECT_EQ(d.coeffs(), c.coeffs());
  EXPECT_DOUBLE_EQ(d.a(), 1.3);
}

TEST(Contour, AngularCoefficientsOfAnnulus) {
  const DepthProfile p = make_bump_profile(1.0, 0.5, 2.0);
  const FourierContour outer(1.0, 3);
  const FourierContour inner(0.5, 3);
  EXPECT_NEAR(angular_coefficient(p, outer, &inner, 0.7, 0), p(0.7), 1e-14);
  EXPECT_NEAR(angular_coefficient(p, outer, &inner, 0.7, 3), 0.0, 1e-14);
  EXPECT_NEAR(angular_coefficient(p, outer, &inner, 0.3, 0), 0.0, 1e-14);
  EXPECT_NEAR(angular_coefficient(p, outer, nullptr, 1.5, 0), 0.0, 1e-14);
}

TEST(Contour, AngularCoefficientOfPerturbedDisc) {
  // For rho slightly below a, the indicator is cut at the arcs where R < rho.
  const DepthProfile p = DepthProfile::constant(1.0);
  const FourierContour c(1.0, 2, {0.05});
  const double rho = 1.0;
  // R(eta) > 1 exactly when cos(2 eta) > 0, i.e. on half the circle.
  EXPECT_NEAR(angular_coefficient(p, c, nullptr, rho, 0), 0.5, 1e-12);
  EXPECT_NEAR(angular_coefficient(p, c, nullptr, rho, 2), 2.0 / std::numbers::pi, 1e-12);
}

TEST(Stream, DiscInteriorDerivative) {
  const DepthProfile p = DepthProfile::constant(1.0);
  const PatchEvaluator ev(p, 3.0);
  const FourierContour disc(1.0, 2);
  for (double rho : {0.3, 0.8, 1.6}) {
    const StreamPoint sp = ev.point(disc, rho, 0.4, 16);
    const double expect = rho < 1.0 ? -0.5 * rho : -0.5 / rho;
    EXPECT_NEAR(sp.d_rho, expect, 1e-9) << "rho = " << rho;
    EXPECT_NEAR(sp.d_theta, 0.0, 1e-12);
  }
}

TEST(Functional, DiscIsStationary) {
  for (const DepthProfile& p : {DepthProfile::constant(1.0), make_bump_profile(1.0, 0.5, 2.0)}) {
    const PatchEvaluator ev(p, 3.0);
    const FunctionalValues F = functional_F(ev, 0.3, FourierContour(1.0, 3));
    EXPECT_LE(F.sup_norm, 1e-12);
  }
}

TEST(Functional, MultipliersForConstantDepth) {
  const DepthProfile p = DepthProfile::constant(1.0);
  const PatchEvaluator ev(p, 3.0);
  for (const MultiplierRow& row : multiplier_check(ev, 1.0, 0.3, 2, 4, 1e-6)) {
    // -nm (Omega - 1/2 + 1/(2nm)) for b = 1.
    const int nm = 2 * row.n;
    EXPECT_NEAR(row.analytic, -nm * (0.3 - 0.5 + 0.5 / nm), 1e-9);
    EXPECT_LE(row.rel_error, 1e-4) << "n = " << row.n;
  }
}
