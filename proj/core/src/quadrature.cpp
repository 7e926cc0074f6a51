#include "lakevort/quadrature.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/legendre.hpp>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "lakevort/error.hpp"

namespace lakevort {

namespace {

GaussRule build_rule(std::size_t n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int order = static_cast<int>(n);
  // Chebyshev initial guesses refined by Newton on P_n.
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    for (int it = 0; it < 100; ++it) {
      const double p = boost::math::legendre_p(order, x);
      const double dp = boost::math::legendre_p_prime(order, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = boost::math::legendre_p_prime(order, x);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.weights[i] = w;
    rule.nodes[n - 1 - i] = x;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace

const GaussRule& gauss_legendre(std::size_t n) {
  if (n == 0) throw ConfigError("gauss_legendre: order must be positive");
  static std::mutex mutex;
  static std::map<std::size_t, std::unique_ptr<GaussRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<GaussRule>(build_rule(n));
  return *slot;
}

double gauss_integrate(const std::function<double(double)>& f, double lo, double hi,
                       std::size_t order) {
  const GaussRule& rule = gauss_legendre(order);
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  double sum = 0.0;
  for (std::size_t i = 0; i < order; ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return half * sum;
}

double adaptive_integrate(const std::function<double(double)>& f, double lo, double hi,
                          double tol, std::span<const double> breakpoints) {
  if (hi == lo) return 0.0;
  const double sign = hi > lo ? 1.0 : -1.0;
  const double a = std::min(lo, hi);
  const double b = std::max(lo, hi);
  std::vector<double> cuts{a};
  for (double c : breakpoints)
    if (c > a && c < b) cuts.push_back(c);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] <= cuts[i]) continue;
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        f, cuts[i], cuts[i + 1], 20, tol);
  }
  return sign * total;
}

void append_cosine_rule(double lo, double hi, std::size_t order, std::vector<double>& nodes,
                        std::vector<double>& weights) {
  const GaussRule& rule = gauss_legendre(order);
  const double half_t = 0.5 * std::numbers::pi;
  for (std::size_t i = 0; i < order; ++i) {
    const double t = half_t * (rule.nodes[i] + 1.0);
    nodes.push_back(lo + 0.5 * (hi - lo) * (1.0 - std::cos(t)));
    weights.push_back(rule.weights[i] * half_t * 0.5 * (hi - lo) * std::sin(t));
  }
}

}  // namespace lakevort
