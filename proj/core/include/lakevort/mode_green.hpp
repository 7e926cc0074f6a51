#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "lakevort/depth.hpp"
#include "lakevort/radial.hpp"

namespace lakevort {

/// Value and radial derivative of a homogeneous mode solution.
struct ModeValue {
  double value = 0.0;
  double slope = 0.0;
};

/// Homogeneous solutions of -(r u'/b)' + n^2 u/(b r) = 0 in scaled form.
///
/// u_minus(r) = r^n phi_minus(r) is regular at the origin and u_plus(r) =
/// r^{-n} phi_plus(r) equals r^{-n} beyond r_inf.  The scaled factors phi are
/// O(1) for every n, which keeps Green values finite for large modes.
class ModeGreen {
 public:
  ModeGreen(const DepthProfile& p, int n, const RadialGrid& grid, double rel_tol = 1e-12);

  int mode() const { return n_; }
  const RadialGrid& grid() const { return grid_; }
  /// Normalisation C = -p W(u_minus, u_plus) with p = r/b.
  double normalization() const { return c_; }
  /// Largest relative deviation of p W from C along the grid.
  double abel_deviation() const { return abel_dev_; }

  /// Scaled factor phi_minus = r^{-n} u_minus and its derivative.
  ModeValue phi_minus(double r) const;
  /// Scaled factor phi_plus = r^{n} u_plus and its derivative.
  ModeValue phi_plus(double r) const;
  /// Logarithmic derivatives u'/u of the two solutions.
  double log_slope_minus(double r) const;
  double log_slope_plus(double r) const;

  /// Green value u_minus(min) u_plus(max) / C.
  double green(double alpha, double beta) const;
  /// Partial derivative of the Green value with respect to alpha.
  double green_d_alpha(double alpha, double beta) const;

  /// Unscaled solutions tabulated on the grid (may under/overflow for large n).
  RadialFunction u_minus() const;
  RadialFunction u_plus() const;

 private:
  ModeValue eval(const std::vector<double>& phi, const std::vector<double>& dphi, double r) const;

  int n_;
  RadialGrid grid_;
  std::vector<double> phi_m_, dphi_m_, phi_p_, dphi_p_;
  double c_ = 0.0;
  double abel_dev_ = 0.0;
};

ModeGreen homogeneous_pair(const DepthProfile& p, int n, const RadialGrid& grid);

/// Lambda_n(alpha, beta) from a prepared mode Green function.
double green_lambda(const ModeGreen& mg, double alpha, double beta);

/// psi_n(alpha) = int G_n(alpha, rho) g_n(rho) rho drho on the grid of mg.
RadialFunction solve_mode_n(const ModeGreen& mg, const RadialFunction& g);
RadialFunction solve_mode_n(const ModeGreen& mg, const RadialSource& g);

/// Thread-safe lazily populated cache of mode Green functions on one grid.
class GreenCache {
 public:
  GreenCache(DepthProfile p, RadialGrid grid);
  const ModeGreen& get(int n) const;
  const DepthProfile& profile() const { return profile_; }
  const RadialGrid& grid() const { return grid_; }

 private:
  DepthProfile profile_;
  RadialGrid grid_;
  mutable std::mutex mutex_;
  mutable std::map<int, std::unique_ptr<ModeGreen>> cache_;
};

}  // namespace lakevort
