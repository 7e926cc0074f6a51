#include "lakevort/radial.hpp"

#include <algorithm>
#include <cmath>

#include "lakevort/error.hpp"
#include "lakevort/quadrature.hpp"

namespace lakevort {

RadialGrid::RadialGrid(std::vector<double> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.size() < 2) throw ConfigError("RadialGrid: need at least two nodes");
  if (!(nodes_.front() > 0.0)) throw ConfigError("RadialGrid: r_min must be positive");
  for (std::size_t i = 1; i < nodes_.size(); ++i)
    if (!(nodes_[i] > nodes_[i - 1])) throw ConfigError("RadialGrid: nodes must increase strictly");
}

RadialGrid RadialGrid::uniform(double r_min, double r_out, std::size_t count) {
  if (count < 2) throw ConfigError("RadialGrid: need at least two nodes");
  if (!(r_min > 0.0) || !(r_out > r_min)) throw ConfigError("RadialGrid: need 0 < r_min < r_out");
  std::vector<double> nodes(count);
  const double h = (r_out - r_min) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) nodes[i] = r_min + h * static_cast<double>(i);
  nodes.back() = r_out;
  RadialGrid grid(std::move(nodes));
  grid.uniform_ = true;
  grid.step_ = h;
  return grid;
}

RadialGrid RadialGrid::for_profile(const DepthProfile& p, double max_radius, std::size_t count) {
  const double r_out = std::max(2.0 * p.r_inf(), 2.0 * max_radius);
  return uniform(1e-6 * p.r_inf(), r_out, count);
}

std::size_t RadialGrid::interval(double r) const {
  if (!(r >= r_min() - 1e-14 * r_out()) || !(r <= r_out() * (1.0 + 1e-14)))
    throw ConfigError("RadialGrid: radius " + std::to_string(r) + " outside [" +
                      std::to_string(r_min()) + ", " + std::to_string(r_out()) + "]");
  const std::size_t last = nodes_.size() - 2;
  if (uniform_) {
    const double pos = (r - nodes_.front()) / step_;
    auto i = static_cast<std::size_t>(std::max(0.0, pos));
    i = std::min(i, last);
    while (i > 0 && nodes_[i] > r) --i;
    while (i < last && nodes_[i + 1] < r) ++i;
    return i;
  }
  const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), r);
  const auto i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - nodes_.begin() - 1, 0));
  return std::min(i, last);
}

nlohmann::json RadialGrid::to_json() const {
  return {{"r_min", r_min()}, {"r_out", r_out()}, {"size", size()}, {"uniform", uniform_}};
}

namespace {

struct Hermite {
  double value;
  double slope;
};

Hermite hermite(double x0, double x1, double f0, double f1, double d0, double d1, double x) {
  const double h = x1 - x0;
  const double t = (x - x0) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1;
  const double h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2;
  const double h11 = t3 - t2;
  const double value = h00 * f0 + h10 * h * d0 + h01 * f1 + h11 * h * d1;
  const double slope = ((6 * t2 - 6 * t) * f0 + (3 * t2 - 4 * t + 1) * h * d0 +
                        (-6 * t2 + 6 * t) * f1 + (3 * t2 - 2 * t) * h * d1) /
                       h;
  return {value, slope};
}

/// Local four-point Lagrange interpolation (value and slope).
Hermite lagrange(const RadialGrid& grid, const std::vector<double>& v, std::size_t i, double r) {
  const std::size_t n = grid.size();
  if (n < 4) {
    const double h = grid[i + 1] - grid[i];
    const double t = (r - grid[i]) / h;
    return {v[i] + t * (v[i + 1] - v[i]), (v[i + 1] - v[i]) / h};
  }
  std::size_t s = i == 0 ? 0 : i - 1;
  s = std::min(s, n - 4);
  double value = 0.0, slope = 0.0;
  for (std::size_t a = s; a < s + 4; ++a) {
    double la = 1.0, dla = 0.0;
    for (std::size_t b = s; b < s + 4; ++b) {
      if (b == a) continue;
      const double denom = grid[a] - grid[b];
      dla = dla * (r - grid[b]) / denom + la / denom;
      la *= (r - grid[b]) / denom;
    }
    value += la * v[a];
    slope += dla * v[a];
  }
  return {value, slope};
}

Hermite interpolate(const RadialFunction& f, double r) {
  const std::size_t i = f.grid.interval(r);
  if (f.has_derivatives())
    return hermite(f.grid[i], f.grid[i + 1], f.values[i], f.values[i + 1], f.derivatives[i],
                   f.derivatives[i + 1], r);
  return lagrange(f.grid, f.values, i, r);
}

}  // namespace

double RadialFunction::operator()(double r) const { return interpolate(*this, r).value; }

double RadialFunction::derivative(double r) const { return interpolate(*this, r).slope; }

RadialFunction solve_mode_zero(const DepthProfile& p, const RadialSource& f0, const RadialGrid& grid) {
  constexpr std::size_t kOrder = 8;
  std::vector<double> cuts(f0.breakpoints);
  cuts.push_back(p.r_inf());
  std::sort(cuts.begin(), cuts.end());

  // Splits [lo, hi] at breakpoints and applies Gauss-Legendre on each piece.
  const auto piecewise = [&](const std::function<double(double)>& g, double lo, double hi) {
    double total = 0.0;
    double a = lo;
    for (double c : cuts) {
      if (c <= a || c >= hi) continue;
      total += gauss_integrate(g, a, c, kOrder);
      a = c;
    }
    return total + gauss_integrate(g, a, hi, kOrder);
  };
  const auto moment_integrand = [&](double t) { return t * f0.f(t); };

  const std::size_t n = grid.size();
  std::vector<double> moment(n);  // int_0^{r_i} tau f0 dtau
  moment[0] = piecewise(moment_integrand, 0.0, grid[0]);
  for (std::size_t i = 1; i < n; ++i)
    moment[i] = moment[i - 1] + piecewise(moment_integrand, grid[i - 1], grid[i]);

  RadialFunction out;
  out.grid = grid;
  out.values.resize(n);
  out.derivatives.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.derivatives[i] = -p(grid[i]) / grid[i] * moment[i];

  const auto slope_from = [&](double base_r, double base_moment) {
    return [&, base_r, base_moment](double s) {
      if (s <= 0.0) return 0.0;
      return -p(s) / s * (base_moment + piecewise(moment_integrand, base_r, s));
    };
  };
  double acc = piecewise(slope_from(0.0, 0.0), 0.0, grid[0]);
  out.values[0] = acc;
  for (std::size_t i = 1; i < n; ++i) {
    acc += piecewise(slope_from(grid[i - 1], moment[i - 1]), grid[i - 1], grid[i]);
    out.values[i] = acc;
  }
  return out;
}

RadialFunction solve_mode_zero(const DepthProfile& p, const RadialFunction& f0) {
  RadialSource source{[&f0](double r) { return f0(std::max(r, f0.grid.r_min())); }, {}};
  return solve_mode_zero(p, source, f0.grid);
}

}  // namespace lakevort
