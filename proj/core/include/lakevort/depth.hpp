#pragma once

#include <array>
#include <memory>
#include <nlohmann/json.hpp>
#include <span>
#include <vector>

namespace lakevort {

class RadialGrid;
struct RadialFunction;

enum class DepthFamily { constant, bump, table };

/// Value and first two radial derivatives of the depth at one radius.
struct DepthSample {
  double b = 0.0;
  double db = 0.0;
  double d2b = 0.0;
};

/// Radial, positive depth b(r) that equals b_inf for r >= r_inf.
///
/// Profiles are immutable after construction and safe to share between threads.
class DepthProfile {
 public:
  /// b(r) = b_inf everywhere; r_inf only fixes the nominal plateau radius.
  static DepthProfile constant(double b_inf, double r_inf = 1.0);
  /// b(r) = b_inf + amp (1 - (r/r_inf)^2)^3 inside r_inf.
  static DepthProfile bump(double b_inf, double amp, double r_inf);
  /// Cubic interpolation of (r, b) samples in the variable r^2; the last sample
  /// fixes r_inf and b_inf and the interpolant joins the plateau with matching
  /// first and second derivatives.
  static DepthProfile table(std::span<const std::array<double, 2>> samples);
  /// Parses {"family": ..., "b_inf": ..., "amp": ..., "r_inf": ..., "table": [...]}.
  static DepthProfile from_json(const nlohmann::json& doc);

  nlohmann::json to_json() const;

  DepthFamily family() const { return family_; }
  double b_inf() const { return b_inf_; }
  double r_inf() const { return r_inf_; }
  double amp() const { return amp_; }
  /// True when b is identically b_inf.
  bool is_constant() const;

  double operator()(double r) const { return sample(r).b; }
  double derivative(double r) const { return sample(r).db; }
  double second_derivative(double r) const { return sample(r).d2b; }
  DepthSample sample(double r) const;

  /// Theta(r) = d/dr (r d/dr b^{-1/2}); zero for r >= r_inf.
  double theta(double r) const;
  /// sup over r of |Theta(r)|, computed once at construction.
  double theta_sup() const { return theta_sup_; }

 private:
  struct Spline;

  DepthProfile() = default;
  void finalize();

  DepthFamily family_ = DepthFamily::constant;
  double b_inf_ = 1.0;
  double r_inf_ = 1.0;
  double amp_ = 0.0;
  std::vector<std::array<double, 2>> samples_;
  std::shared_ptr<const Spline> spline_;
  double theta_sup_ = 0.0;
};

/// Builds the bump profile, rejecting amp <= -b_inf.
DepthProfile make_bump_profile(double b_inf, double amp, double r_inf);

/// Theta tabulated on the grid nodes together with its sup norm.
struct ThetaTable {
  std::vector<double> radius;
  std::vector<double> theta;
  double sup_norm = 0.0;
};

ThetaTable theta_profile(const DepthProfile& p, std::span<const double> radii);

/// Q(alpha, beta) = alpha^{-2} * integral of tau b(tau) between min and max of (alpha, beta).
double q_factor(const DepthProfile& p, double alpha, double beta);

/// Integral of tau * b(tau)^power over [lo, hi].
double radial_moment(const DepthProfile& p, double lo, double hi, double power = 1.0);

}  // namespace lakevort
