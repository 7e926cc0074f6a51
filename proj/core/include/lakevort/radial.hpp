#pragma once

#include <cstddef>
#include <functional>
#include <nlohmann/json.hpp>
#include <span>
#include <vector>

#include "lakevort/depth.hpp"

namespace lakevort {

/// Strictly increasing radii in [r_min, r_out] with r_min > 0.
class RadialGrid {
 public:
  RadialGrid() = default;
  explicit RadialGrid(std::vector<double> nodes);
  static RadialGrid uniform(double r_min, double r_out, std::size_t count);
  /// Default grid for a profile: r_min = 1e-6 r_inf, r_out = max(2 r_inf, 2 max_radius).
  static RadialGrid for_profile(const DepthProfile& p, double max_radius, std::size_t count = 2048);

  std::span<const double> nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  double r_min() const { return nodes_.front(); }
  double r_out() const { return nodes_.back(); }
  double operator[](std::size_t i) const { return nodes_[i]; }
  bool contains(double r) const { return r >= r_min() && r <= r_out(); }
  /// Index i with nodes[i] <= r <= nodes[i+1]; r must lie inside the grid.
  std::size_t interval(double r) const;

  nlohmann::json to_json() const;

 private:
  std::vector<double> nodes_;
  bool uniform_ = false;
  double step_ = 0.0;
};

/// Function of radius tabulated on a grid, with optional derivative table.
struct RadialFunction {
  RadialGrid grid;
  std::vector<double> values;
  std::vector<double> derivatives;  ///< empty when not available
  int decay_exponent = 0;           ///< far-field behaviour r^{-decay_exponent} beyond r_out

  bool has_derivatives() const { return !derivatives.empty(); }
  /// Cubic Hermite interpolation when derivatives are present, local cubic
  /// Lagrange interpolation otherwise.
  double operator()(double r) const;
  double derivative(double r) const;
};

/// Radial source given by a callable, smooth between the listed breakpoints.
struct RadialSource {
  std::function<double(double)> f;
  std::vector<double> breakpoints;
};

/// Mode-zero solution psi(r) = -int_0^r (b(s)/s) int_0^s tau f0(tau) dtau ds
/// tabulated on the grid with its derivative.
RadialFunction solve_mode_zero(const DepthProfile& p, const RadialSource& f0, const RadialGrid& grid);
RadialFunction solve_mode_zero(const DepthProfile& p, const RadialFunction& f0);

}  // namespace lakevort
