#include "lakevort/depth.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lakevort/error.hpp"
#include "lakevort/quadrature.hpp"

namespace lakevort {

/// Cubic spline of b in the variable x = r^2, natural at the left end and
/// flat with zero curvature at x = r_inf^2.
struct DepthProfile::Spline {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> m;  // second derivatives in x

  static std::vector<double> second_derivatives(const std::vector<double>& x,
                                                const std::vector<double>& y) {
    const std::size_t n = x.size();
    std::vector<double> diag(n, 0.0), upper(n, 0.0), lower(n, 0.0), rhs(n, 0.0);
    diag[0] = 1.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = x[i] - x[i - 1];
      const double h1 = x[i + 1] - x[i];
      lower[i] = h0;
      diag[i] = 2.0 * (h0 + h1);
      upper[i] = h1;
      rhs[i] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
    }
    const double hl = x[n - 1] - x[n - 2];
    lower[n - 1] = hl;
    diag[n - 1] = 2.0 * hl;
    rhs[n - 1] = -6.0 * (y[n - 1] - y[n - 2]) / hl;
    // Thomas algorithm.
    for (std::size_t i = 1; i < n; ++i) {
      const double w = lower[i] / diag[i - 1];
      diag[i] -= w * upper[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    std::vector<double> m(n);
    m[n - 1] = rhs[n - 1] / diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) m[i] = (rhs[i] - upper[i] * m[i + 1]) / diag[i];
    return m;
  }

  Spline(const std::vector<double>& xs, const std::vector<double>& ys) {
    const std::size_t n = xs.size();
    x.assign(xs.begin(), xs.end() - 1);
    y.assign(ys.begin(), ys.end() - 1);
    x.push_back(0.5 * (xs[n - 2] + xs[n - 1]));
    y.push_back(0.0);
    x.push_back(xs[n - 1]);
    y.push_back(ys[n - 1]);
    const std::size_t free = x.size() - 2;
    const auto m0 = second_derivatives(x, y);
    y[free] = 1.0;
    const auto m1 = second_derivatives(x, y);
    const double slope = m1.back() - m0.back();
    y[free] = -m0.back() / slope;
    m = second_derivatives(x, y);
  }

  /// Value and first two derivatives with respect to x.
  std::array<double, 3> eval(double xv) const {
    std::size_t i = 0;
    if (xv >= x.front()) {
      i = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), xv) - x.begin());
      i = std::min(i == 0 ? 0 : i - 1, x.size() - 2);
    }
    const double h = x[i + 1] - x[i];
    const double a = x[i + 1] - xv;
    const double c = xv - x[i];
    const double val = m[i] * a * a * a / (6 * h) + m[i + 1] * c * c * c / (6 * h) +
                       (y[i] / h - m[i] * h / 6) * a + (y[i + 1] / h - m[i + 1] * h / 6) * c;
    const double d1 = -m[i] * a * a / (2 * h) + m[i + 1] * c * c / (2 * h) -
                      (y[i] / h - m[i] * h / 6) + (y[i + 1] / h - m[i + 1] * h / 6);
    const double d2 = m[i] * a / h + m[i + 1] * c / h;
    return {val, d1, d2};
  }
};

DepthProfile DepthProfile::constant(double b_inf, double r_inf) {
  if (!(b_inf > 0.0)) throw ConfigError("depth: b_inf must be positive");
  if (!(r_inf > 0.0)) throw ConfigError("depth: r_inf must be positive");
  DepthProfile p;
  p.family_ = DepthFamily::constant;
  p.b_inf_ = b_inf;
  p.r_inf_ = r_inf;
  p.finalize();
  return p;
}

DepthProfile DepthProfile::bump(double b_inf, double amp, double r_inf) {
  if (!(b_inf > 0.0)) throw ConfigError("depth: b_inf must be positive");
  if (!(r_inf > 0.0)) throw ConfigError("depth: r_inf must be positive");
  if (!std::isfinite(amp) || amp <= -b_inf)
    throw ConfigError("depth: bump amplitude must exceed -b_inf (got " + std::to_string(amp) +
                      ")");
  DepthProfile p;
  p.family_ = DepthFamily::bump;
  p.b_inf_ = b_inf;
  p.amp_ = amp;
  p.r_inf_ = r_inf;
  p.finalize();
  return p;
}

DepthProfile DepthProfile::table(std::span<const std::array<double, 2>> samples) {
  if (samples.size() < 2) throw ConfigError("depth: table needs at least two samples");
  std::vector<double> xs, ys;
  double prev = -1.0;
  for (const auto& [r, b] : samples) {
    if (!std::isfinite(r) || r < 0.0) throw ConfigError("depth: table radii must be >= 0");
    if (r <= prev) throw ConfigError("depth: table radii must be strictly increasing");
    if (!(b > 0.0)) throw ConfigError("depth: table values must be positive");
    prev = r;
    xs.push_back(r * r);
    ys.push_back(b);
  }
  DepthProfile p;
  p.family_ = DepthFamily::table;
  p.samples_.assign(samples.begin(), samples.end());
  p.r_inf_ = samples.back()[0];
  p.b_inf_ = samples.back()[1];
  if (!(p.r_inf_ > 0.0)) throw ConfigError("depth: table must extend to a positive radius");
  p.spline_ = std::make_shared<const Spline>(xs, ys);
  constexpr int kChecks = 4000;
  for (int i = 0; i <= kChecks; ++i) {
    const double r = p.r_inf_ * i / kChecks;
    if (!(p.spline_->eval(r * r)[0] > 0.0))
      throw ConfigError("depth: table interpolant is not positive at r = " + std::to_string(r));
  }
  p.finalize();
  return p;
}

DepthProfile DepthProfile::from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("depth: profile must be a JSON object");
  const std::string family = doc.value("family", std::string("bump"));
  try {
    if (family == "constant")
      return constant(doc.value("b_inf", 1.0), doc.value("r_inf", 1.0));
    if (family == "bump")
      return bump(doc.at("b_inf").get<double>(), doc.value("amp", 0.0),
                  doc.at("r_inf").get<double>());
    if (family == "table") {
      const auto rows = doc.at("table").get<std::vector<std::array<double, 2>>>();
      return table(rows);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("depth: malformed profile: ") + e.what());
  }
  throw ConfigError("depth: unknown family '" + family + "'");
}

nlohmann::json DepthProfile::to_json() const {
  switch (family_) {
    case DepthFamily::constant:
      return {{"family", "constant"}, {"b_inf", b_inf_}, {"r_inf", r_inf_}};
    case DepthFamily::bump:
      return {{"family", "bump"}, {"b_inf", b_inf_}, {"amp", amp_}, {"r_inf", r_inf_}};
    case DepthFamily::table:
      return {{"family", "table"}, {"b_inf", b_inf_}, {"r_inf", r_inf_}, {"table", samples_}};
  }
  return {};
}

bool DepthProfile::is_constant() const {
  return family_ == DepthFamily::constant || (family_ == DepthFamily::bump && amp_ == 0.0);
}

DepthSample DepthProfile::sample(double r) const {
  if (r >= r_inf_ || family_ == DepthFamily::constant) return {b_inf_, 0.0, 0.0};
  if (family_ == DepthFamily::bump) {
    const double x = r / r_inf_;
    const double q = 1.0 - x * x;
    const double scale = 6.0 * amp_ / (r_inf_ * r_inf_);
    return {b_inf_ + amp_ * q * q * q, -scale * r * q * q, -scale * q * (1.0 - 5.0 * x * x)};
  }
  const auto [v, d1, d2] = spline_->eval(r * r);
  return {v, 2.0 * r * d1, 2.0 * d1 + 4.0 * r * r * d2};
}

double DepthProfile::theta(double r) const {
  if (r >= r_inf_ || is_constant()) return 0.0;
  const DepthSample s = sample(r);
  const double inv_sqrt = 1.0 / std::sqrt(s.b);
  const double inv_b = 1.0 / s.b;
  const double ds = -0.5 * inv_sqrt * inv_b * s.db;
  const double d2s = 0.75 * inv_sqrt * inv_b * inv_b * s.db * s.db - 0.5 * inv_sqrt * inv_b * s.d2b;
  return ds + r * d2s;
}

void DepthProfile::finalize() {
  theta_sup_ = 0.0;
  if (is_constant()) return;
  constexpr int kSamples = 20000;
  double best_r = 0.0;
  for (int i = 0; i <= kSamples; ++i) {
    const double r = r_inf_ * i / kSamples;
    const double v = std::abs(theta(r));
    if (v > theta_sup_) {
      theta_sup_ = v;
      best_r = r;
    }
  }
  // Golden-section polish around the best sample.
  double lo = std::max(0.0, best_r - r_inf_ / kSamples);
  double hi = std::min(r_inf_, best_r + r_inf_ / kSamples);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 60; ++it) {
    const double c = hi - g * (hi - lo);
    const double d = lo + g * (hi - lo);
    if (std::abs(theta(c)) > std::abs(theta(d)))
      hi = d;
    else
      lo = c;
  }
  theta_sup_ = std::max(theta_sup_, std::abs(theta(0.5 * (lo + hi))));
}

DepthProfile make_bump_profile(double b_inf, double amp, double r_inf) {
  return DepthProfile::bump(b_inf, amp, r_inf);
}

ThetaTable theta_profile(const DepthProfile& p, std::span<const double> radii) {
  ThetaTable out;
  out.radius.assign(radii.begin(), radii.end());
  out.theta.reserve(radii.size());
  for (double r : radii) out.theta.push_back(p.theta(r));
  out.sup_norm = p.theta_sup();
  return out;
}

double radial_moment(const DepthProfile& p, double lo, double hi, double power) {
  if (hi <= lo) return 0.0;
  const double binf = std::pow(p.b_inf(), power);
  if (p.is_constant()) return binf * 0.5 * (hi * hi - lo * lo);
  double total = 0.0;
  const double mid = std::clamp(p.r_inf(), lo, hi);
  if (mid > lo) {
    const auto f = [&](double t) { return t * std::pow(p(t), power); };
    total += adaptive_integrate(f, lo, mid, 1e-14);
  }
  if (hi > mid) total += binf * 0.5 * (hi * hi - mid * mid);
  return total;
}

double q_factor(const DepthProfile& p, double alpha, double beta) {
  if (!(alpha > 0.0)) throw ConfigError("q_factor: alpha must be positive");
  if (!(beta >= 0.0)) throw ConfigError("q_factor: beta must be nonnegative");
  return radial_moment(p, std::min(alpha, beta), std::max(alpha, beta)) / (alpha * alpha);
}

}  // namespace lakevort
