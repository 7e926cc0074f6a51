#include "lakevort/contour.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include "lakevort/error.hpp"

namespace lakevort {

namespace {

constexpr double kPi = std::numbers::pi;

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

FourierContour::FourierContour(double a, int m, std::vector<double> coeffs)
    : a_(a), m_(m), coeffs_(std::move(coeffs)) {
  if (!(a > 0.0) || !std::isfinite(a)) throw ConfigError("FourierContour: a must be positive");
  if (m < 1) throw ConfigError("FourierContour: m must be >= 1");
  for (double c : coeffs_)
    if (!std::isfinite(c)) throw GeometryError("FourierContour: non-finite coefficient");
  analyse();
}

std::array<double, 3> FourierContour::r_derivatives(double theta) const {
  const double x = m_ * theta;
  const double c1 = std::cos(x);
  const double s1 = std::sin(x);
  double ck = c1, sk = s1;
  double r = 0.0, dr = 0.0, d2r = 0.0;
  for (std::size_t k = 0; k < coeffs_.size(); ++k) {
    const double km = static_cast<double>((k + 1) * static_cast<std::size_t>(m_));
    r += coeffs_[k] * ck;
    dr -= km * coeffs_[k] * sk;
    d2r -= km * km * coeffs_[k] * ck;
    const double next_c = ck * c1 - sk * s1;
    sk = sk * c1 + ck * s1;
    ck = next_c;
  }
  return {r, dr, d2r};
}

std::array<double, 3> FourierContour::radius_derivatives(double theta) const {
  const auto [r, dr, d2r] = r_derivatives(theta);
  const double big = std::sqrt(a_ * a_ + 2.0 * r);
  const double d1 = dr / big;
  return {big, d1, (d2r - d1 * d1) / big};
}

double FourierContour::radius(double theta) const {
  return std::sqrt(a_ * a_ + 2.0 * r_derivatives(theta)[0]);
}

bool FourierContour::is_graph(std::size_t samples) const {
  const double period = 2.0 * kPi / m_;
  for (std::size_t i = 0; i <= samples; ++i) {
    const double theta = period * static_cast<double>(i) / static_cast<double>(samples);
    if (!(a_ * a_ + 2.0 * r(theta) > 0.0)) return false;
  }
  return true;
}

void FourierContour::validate() const {
  if (!is_graph()) throw GeometryError("FourierContour: a^2 + 2 r(theta) <= 0, boundary is not a graph");
}

void FourierContour::analyse() {
  const double end = kPi / m_;
  critical_ = {0.0};
  const std::size_t samples = std::max<std::size_t>(64, 16 * coeffs_.size());
  const auto slope = [&](double t) { return r_derivatives(t)[1]; };
  bool any = false;
  for (double c : coeffs_) any = any || c != 0.0;
  if (any) {
    double prev_t = 0.0;
    double prev_v = slope(end / static_cast<double>(samples) * 1e-3);
    for (std::size_t i = 1; i <= samples; ++i) {
      const double t = i == samples ? end * (1.0 - 1e-9) : end * static_cast<double>(i) / static_cast<double>(samples);
      const double v = slope(t);
      if ((prev_v < 0.0 && v > 0.0) || (prev_v > 0.0 && v < 0.0)) {
        double lo = prev_t, hi = t, flo = prev_v;
        for (int it = 0; it < 80 && hi - lo > 1e-15; ++it) {
          const double mid = 0.5 * (lo + hi);
          const double fm = slope(mid);
          if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
          } else {
            hi = mid;
          }
        }
        const double root = 0.5 * (lo + hi);
        if (root > 1e-12 && root < end - 1e-12) critical_.push_back(root);
      }
      if (v != 0.0) {
        prev_v = v;
        prev_t = t;
      }
    }
  }
  critical_.push_back(end);
  critical_radius_.clear();
  r_min_ = std::numeric_limits<double>::infinity();
  r_max_ = -std::numeric_limits<double>::infinity();
  for (double t : critical_) {
    const double v = radius(t);
    critical_radius_.push_back(v);
    r_min_ = std::min(r_min_, v);
    r_max_ = std::max(r_max_, v);
  }
}

double FourierContour::crossing(double lo, double hi, double rho) const {
  const double target = rho * rho - a_ * a_;
  const auto q = [&](double t) { return 2.0 * r_derivatives(t)[0] - target; };
  double qlo = q(lo);
  double t = 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    const auto d = r_derivatives(t);
    const double v = 2.0 * d[0] - target;
    if (v == 0.0) return t;
    if ((v < 0.0) == (qlo < 0.0)) {
      lo = t;
      qlo = v;
    } else {
      hi = t;
    }
    double next = t - v / (2.0 * d[1]);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) < 1e-16 || hi - lo < 1e-16) return next;
    t = next;
  }
  return t;
}

std::vector<Arc> FourierContour::arcs_fundamental(double rho) const {
  const double end = kPi / m_;
  if (rho < r_min_) return {{0.0, end}};
  if (rho >= r_max_) return {};
  std::vector<double> points(critical_);
  for (std::size_t i = 0; i + 1 < critical_.size(); ++i) {
    const double v0 = critical_radius_[i];
    const double v1 = critical_radius_[i + 1];
    if ((rho - v0) * (rho - v1) < 0.0) points.push_back(crossing(critical_[i], critical_[i + 1], rho));
  }
  std::sort(points.begin(), points.end());
  std::vector<Arc> arcs;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    if (points[i + 1] <= points[i]) continue;
    const double mid = 0.5 * (points[i] + points[i + 1]);
    if (radius(mid) > rho) {
      if (!arcs.empty() && arcs.back().end == points[i])
        arcs.back().end = points[i + 1];
      else
        arcs.push_back({points[i], points[i + 1]});
    }
  }
  return arcs;
}

std::vector<Arc> FourierContour::arcs_full(double rho) const {
  const double target = rho * rho - a_ * a_;
  const auto q = [&](double t) { return 2.0 * r_derivatives(t)[0] - target; };
  const std::size_t mesh = std::max<std::size_t>(512, 32 * coeffs_.size() * static_cast<std::size_t>(m_));
  const double step = 2.0 * kPi / static_cast<double>(mesh);
  struct Crossing {
    double angle;
    bool up;
  };
  std::vector<Crossing> crossings;
  double prev = q(0.0);
  for (std::size_t i = 1; i <= mesh; ++i) {
    const double t1 = step * static_cast<double>(i);
    const double v = q(t1);
    if ((prev < 0.0) != (v < 0.0)) {
      double lo = t1 - step, hi = t1;
      const bool lo_negative = prev < 0.0;
      while (hi - lo > 1e-13) {
        const double mid = 0.5 * (lo + hi);
        if ((q(mid) < 0.0) == lo_negative)
          lo = mid;
        else
          hi = mid;
      }
      crossings.push_back({0.5 * (lo + hi), lo_negative});
    }
    prev = v;
  }
  const std::size_t limit = 2 * coeffs_.size() * static_cast<std::size_t>(m_);
  if (crossings.size() > std::max<std::size_t>(limit, 2))
    throw GeometryError("patch_modes: " + std::to_string(crossings.size()) +
                        " crossings at rho = " + format_number(rho) + "; contour is not a graph");
  if (crossings.empty()) {
    if (q(0.0) >= 0.0) return {{0.0, 2.0 * kPi}};
    return {};
  }
  std::vector<Arc> arcs;
  const std::size_t count = crossings.size();
  for (std::size_t i = 0; i < count; ++i) {
    if (!crossings[i].up) continue;
    const Crossing& next = crossings[(i + 1) % count];
    double end = next.angle;
    if (end <= crossings[i].angle) end += 2.0 * kPi;
    arcs.push_back({crossings[i].angle, end});
  }
  return arcs;
}

nlohmann::json FourierContour::to_json() const { return {{"a", a_}, {"m", m_}, {"coeffs", coeffs_}}; }

FourierContour FourierContour::from_json(const nlohmann::json& doc) {
  try {
    return FourierContour(doc.at("a").get<double>(), doc.at("m").get<int>(),
                          doc.value("coeffs", std::vector<double>{}));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("FourierContour: malformed JSON: ") + e.what());
  }
}

std::string FourierContour::boundary_csv(std::size_t n) const {
  std::ostringstream out;
  out << "theta,x,y\n";
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(n);
    const double big = radius(t);
    out << format_number(t) << ',' << format_number(big * std::cos(t)) << ','
        << format_number(big * std::sin(t)) << '\n';
  }
  return out.str();
}

bool nested(const FourierContour& outer, const FourierContour& inner, std::size_t samples) {
  for (std::size_t i = 0; i < samples; ++i) {
    const double t = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(samples);
    if (!(inner.radius(t) < outer.radius(t))) return false;
  }
  return true;
}

namespace {

double arc_coefficient(const std::vector<Arc>& arcs, int l) {
  double total = 0.0;
  for (const Arc& arc : arcs) {
    if (l == 0)
      total += arc.end - arc.begin;
    else
      total += (std::sin(l * arc.end) - std::sin(l * arc.begin)) / l;
  }
  return l == 0 ? total / (2.0 * kPi) : total / kPi;
}

}  // namespace

double angular_coefficient(const DepthProfile& p, const FourierContour& outer,
                           const FourierContour* inner, double rho, int l) {
  if (l < 0) throw ConfigError("angular_coefficient: mode must be >= 0");
  double value = arc_coefficient(outer.arcs_full(rho), l);
  if (inner) value -= arc_coefficient(inner->arcs_full(rho), l);
  return p(rho) * value;
}

PatchModes patch_modes(const DepthProfile& p, const FourierContour& outer,
                       const FourierContour* inner, const std::vector<double>& radii, int l_max) {
  outer.validate();
  if (inner) {
    inner->validate();
    if (inner->m() != outer.m()) throw ConfigError("patch_modes: contours must share m");
    if (!nested(outer, *inner)) throw GeometryError("patch_modes: inner contour is not nested inside outer");
  }
  PatchModes modes;
  modes.m = outer.m();
  for (int l = 0; l <= l_max; l += outer.m()) modes.modes.push_back(l);
  modes.radius = radii;
  modes.g.assign(modes.modes.size(), std::vector<double>(radii.size(), 0.0));
  for (std::size_t j = 0; j < radii.size(); ++j) {
    const double rho = radii[j];
    const double b = p(rho);
    const auto outer_arcs = outer.arcs_full(rho);
    const auto inner_arcs = inner ? inner->arcs_full(rho) : std::vector<Arc>{};
    for (std::size_t k = 0; k < modes.modes.size(); ++k) {
      const int l = modes.modes[k];
      modes.g[k][j] = b * (arc_coefficient(outer_arcs, l) - arc_coefficient(inner_arcs, l));
    }
  }
  return modes;
}

double PatchModes::tail_ratio() const {
  if (g.size() < 3) return 0.0;
  double first = 0.0, last = 0.0;
  for (double v : g[1]) first = std::max(first, std::abs(v));
  for (double v : g.back()) last = std::max(last, std::abs(v));
  return first > 0.0 ? last / first : 0.0;
}

std::string PatchModes::to_csv() const {
  std::ostringstream out;
  out << "rho";
  for (int l : modes) out << ",g_" << l;
  out << '\n';
  for (std::size_t j = 0; j < radius.size(); ++j) {
    out << format_number(radius[j]);
    for (const auto& column : g) out << ',' << format_number(column[j]);
    out << '\n';
  }
  return out.str();
}

}  // namespace lakevort
