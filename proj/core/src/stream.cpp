#include "lakevort/stream.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lakevort/error.hpp"
#include "lakevort/quadrature.hpp"

namespace lakevort {

namespace {

constexpr double kPi = std::numbers::pi;

double hermite_value(double h, double t, double f0, double f1, double d0, double d1) {
  const double t2 = t * t;
  const double t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * f0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * f1 +
         (t3 - t2) * h * d1;
}

bool same_contour(const FourierContour& a, const FourierContour& b) {
  return &a == &b || (a.a() == b.a() && a.m() == b.m() && a.coeffs() == b.coeffs());
}

}  // namespace

LogPotential::LogPotential(const DepthProfile& p, std::size_t samples) : profile_(p) {
  w_inf_ = std::pow(p.b_inf(), 1.5);
  if (p.is_constant()) return;
  step_ = p.r_inf() / static_cast<double>(samples);
  const GaussRule& rule = gauss_legendre(8);
  const auto w = [&](double r) { return std::pow(p(r), 1.5); };
  w_.resize(samples + 1);
  moment_.assign(samples + 1, 0.0);
  potential_.assign(samples + 1, 0.0);
  for (std::size_t i = 0; i <= samples; ++i) w_[i] = w(step_ * static_cast<double>(i));
  for (std::size_t i = 0; i < samples; ++i) {
    const double a = step_ * static_cast<double>(i);
    const double half = 0.5 * step_;
    double piece = 0.0, pot = 0.0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double s = a + half * (rule.nodes[q] + 1.0);
      piece += rule.weights[q] * s * w(s);
      // Moment at s by an inner rule on [a, s].
      const double inner_half = 0.5 * (s - a);
      double inner = 0.0;
      for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        const double u = a + inner_half * (rule.nodes[k] + 1.0);
        inner += rule.weights[k] * u * w(u);
      }
      pot += rule.weights[q] * (moment_[i] + inner_half * inner) / s;
    }
    moment_[i + 1] = moment_[i] + half * piece;
    potential_[i + 1] = potential_[i] + half * pot;
  }
}

double LogPotential::value(double r) const {
  if (profile_.is_constant()) return 0.25 * w_inf_ * r * r;
  const double big = profile_.r_inf();
  if (r >= big) {
    const double log_ratio = std::log(r / big);
    return potential_.back() + moment_.back() * log_ratio +
           w_inf_ * (0.25 * (r * r - big * big) - 0.5 * big * big * log_ratio);
  }
  const auto i = std::min(static_cast<std::size_t>(r / step_), w_.size() - 2);
  const double r0 = step_ * static_cast<double>(i);
  const double r1 = r0 + step_;
  const double d0 = i == 0 ? 0.0 : moment_[i] / r0;
  const double d1 = moment_[i + 1] / r1;
  return hermite_value(step_, (r - r0) / step_, potential_[i], potential_[i + 1], d0, d1);
}

double LogPotential::slope(double r) const {
  if (profile_.is_constant()) return 0.5 * w_inf_ * r;
  const double big = profile_.r_inf();
  if (r >= big) return (moment_.back() + 0.5 * w_inf_ * (r * r - big * big)) / r;
  const auto i = std::min(static_cast<std::size_t>(r / step_), w_.size() - 2);
  const double r0 = step_ * static_cast<double>(i);
  const double r1 = r0 + step_;
  const double s0 = i == 0 ? 0.0 : moment_[i] / r0;
  const double s1 = moment_[i + 1] / r1;
  const double c0 = i == 0 ? 0.5 * w_[0] : w_[i] - s0 / r0;
  const double c1 = w_[i + 1] - s1 / r1;
  return hermite_value(step_, (r - r0) / step_, s0, s1, c0, c1);
}

LogIntegral::LogIntegral(const DepthProfile& p, std::size_t samples) : profile_(p), b0_(p(0.0)) {
  if (p.is_constant()) return;
  step_ = p.r_inf() / static_cast<double>(samples);
  const auto excess = [&](double s) { return s > 0.0 ? (p(s) - b0_) / s : 0.0; };
  e_.assign(samples + 1, 0.0);
  for (std::size_t i = 0; i < samples; ++i) {
    const double a = step_ * static_cast<double>(i);
    e_[i + 1] = e_[i] + gauss_integrate(excess, a, a + step_, 8);
  }
}

double LogIntegral::operator()(double r) const {
  if (profile_.is_constant()) return b0_ * std::log(r);
  const double big = profile_.r_inf();
  if (r >= big) return b0_ * std::log(r) + e_.back() + (profile_.b_inf() - b0_) * std::log(r / big);
  const auto i = std::min(static_cast<std::size_t>(r / step_), e_.size() - 2);
  const double r0 = step_ * static_cast<double>(i);
  const double r1 = r0 + step_;
  const double d0 = i == 0 ? 0.0 : (profile_(r0) - b0_) / r0;
  const double d1 = (profile_(r1) - b0_) / r1;
  return b0_ * std::log(r) + hermite_value(step_, (r - r0) / step_, e_[i], e_[i + 1], d0, d1);
}

/// Quadrature nodes over the band R_min < rho < R_max with source amplitudes.
struct PatchEvaluator::Band {
  std::vector<double> rho;
  std::vector<double> weight;
  std::vector<std::vector<double>> g;  // g[k][j] for modes k*m, k = 0..K
};

struct PatchEvaluator::RadialData {
  double psi0 = 0.0;
  double dpsi0 = 0.0;
  std::vector<double> psi;   // modes m, 2m, ...
  std::vector<double> dpsi;
};

PatchEvaluator::PatchEvaluator(DepthProfile p, double max_radius, EvaluatorOptions options)
    : profile_(std::move(p)), options_(options), potential_(profile_), log_integral_(profile_) {
  if (options_.theta_nodes < 8) throw ConfigError("PatchEvaluator: need at least 8 boundary nodes");
  if (options_.l_max_factor < 1) throw ConfigError("PatchEvaluator: l_max_factor must be >= 1");
  greens_ = std::make_unique<GreenCache>(profile_, RadialGrid::for_profile(profile_, max_radius, options_.n_r));
}

std::size_t PatchEvaluator::theta_nodes(int m, std::size_t multiplier) const {
  const std::size_t period = 2 * static_cast<std::size_t>(m);
  const std::size_t n = options_.theta_nodes * multiplier;
  return ((n + period - 1) / period) * period;
}

std::vector<double> PatchEvaluator::source_modes(const FourierContour& domain, double rho, int l_max) const {
  const int m = domain.m();
  std::vector<double> out;
  const auto arcs = domain.arcs_fundamental(rho);
  const double b = profile_(rho);
  double length = 0.0;
  for (const Arc& a : arcs) length += a.end - a.begin;
  out.push_back(b * m * length / kPi);
  for (int l = m; l <= l_max; l += m) {
    double s = 0.0;
    for (const Arc& a : arcs) s += std::sin(l * a.end) - std::sin(l * a.begin);
    out.push_back(b * 2.0 * m * s / (kPi * l));
  }
  return out;
}

PatchEvaluator::Band PatchEvaluator::band(const FourierContour& domain, double alpha, int l_max) const {
  Band out;
  const double lo = domain.min_radius();
  const double hi = domain.max_radius();
  const std::size_t modes = static_cast<std::size_t>(l_max / domain.m()) + 1;
  out.g.assign(modes, {});
  if (!(hi - lo > 1e-14 * hi)) return out;
  std::vector<double> cuts{lo, hi};
  for (double v : domain.critical_radii())
    if (v > lo && v < hi) cuts.push_back(v);
  if (alpha > lo && alpha < hi) cuts.push_back(alpha);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  const std::size_t order =
      options_.band_order > 0 ? options_.band_order
                              : 32 + 4 * (modes - 1);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) append_cosine_rule(cuts[i], cuts[i + 1], order, out.rho, out.weight);
  for (auto& column : out.g) column.resize(out.rho.size());
  for (std::size_t j = 0; j < out.rho.size(); ++j) {
    const auto g = source_modes(domain, out.rho[j], l_max);
    for (std::size_t k = 0; k < modes; ++k) out.g[k][j] = g[k];
  }
  return out;
}

PatchEvaluator::RadialData PatchEvaluator::radial(const FourierContour& domain, const Band& bd,
                                                  double alpha, bool full, bool values) const {
  const DepthProfile& p = profile_;
  const double lo = domain.min_radius();
  const double b_alpha = p(alpha);
  RadialData out;

  // Mode zero.
  double i0 = radial_moment(p, 0.0, std::min(alpha, lo));
  for (std::size_t j = 0; j < bd.rho.size(); ++j)
    if (bd.rho[j] < alpha) i0 += bd.weight[j] * bd.rho[j] * bd.g[0][j];
  out.dpsi0 = -b_alpha / alpha * i0;

  double phi0 = 0.0;
  if (!full) {
    double iw = radial_moment(p, 0.0, std::min(alpha, lo), 1.5);
    double j_tail = 0.0;
    if (alpha < lo) {
      const double cuts[] = {p.r_inf()};
      j_tail = adaptive_integrate([&](double t) { return std::log(t) * t * std::pow(p(t), 1.5); }, alpha, lo,
                                  1e-13, cuts);
    }
    for (std::size_t j = 0; j < bd.rho.size(); ++j) {
      const double rho = bd.rho[j];
      const double term = bd.weight[j] * rho * std::sqrt(p(rho)) * bd.g[0][j];
      if (rho < alpha)
        iw += term;
      else
        j_tail += std::log(rho) * term;
    }
    phi0 = -(std::log(alpha) * iw + j_tail);
    const double dphi0 = -iw / alpha;
    const double sb = std::sqrt(b_alpha);
    const double dsb = p.derivative(alpha) / (2.0 * sb);
    out.dpsi0 = out.dpsi0 - dsb * phi0 - sb * dphi0;
  }
  if (values) {
    // psi_0(alpha) = -int_0^alpha (H(alpha) - H(tau)) tau g_0(tau) dtau.
    const double c = std::min(alpha, lo);
    double disc_log = 0.0;
    {
      std::lock_guard lock(mutex_);
      auto it = disc_log_moment_.find(c);
      if (it != disc_log_moment_.end()) disc_log = it->second;
    }
    if (disc_log == 0.0 && c > 0.0) {
      // tau = e s^2 absorbs the tau log tau endpoint behaviour.
      const double e = std::min(c, p.r_inf());
      disc_log = gauss_integrate(
          [&](double s) {
            const double tau = e * s * s;
            return s > 0.0 ? 2.0 * e * e * s * s * s * log_integral_(tau) * p(tau) : 0.0;
          },
          0.0, 1.0, 64);
      if (c > e) disc_log += gauss_integrate([&](double tau) { return log_integral_(tau) * tau * p(tau); }, e, c, 32);
      std::lock_guard lock(mutex_);
      disc_log_moment_[c] = disc_log;
    }
    const double h_alpha = log_integral_(alpha);
    double psi0 = -(h_alpha * radial_moment(p, 0.0, c) - disc_log);
    for (std::size_t j = 0; j < bd.rho.size(); ++j)
      if (bd.rho[j] < alpha)
        psi0 -= bd.weight[j] * bd.rho[j] * bd.g[0][j] * (h_alpha - log_integral_(bd.rho[j]));
    out.psi0 = full ? psi0 : psi0 - std::sqrt(b_alpha) * phi0;
  }

  // Modes m, 2m, ...
  const std::size_t modes = bd.g.size();
  out.psi.assign(modes > 0 ? modes - 1 : 0, 0.0);
  out.dpsi.assign(out.psi.size(), 0.0);
  if (bd.rho.empty()) return out;
  const double sb_alpha = std::sqrt(b_alpha);
  const double db_alpha = p.derivative(alpha);
  for (std::size_t k = 1; k < modes; ++k) {
    const int l = static_cast<int>(k) * domain.m();
    const ModeGreen& mg = greens_->get(l);
    double s = 0.0, ds = 0.0;
    for (std::size_t j = 0; j < bd.rho.size(); ++j) {
      const double rho = bd.rho[j];
      const double weight = bd.weight[j] * rho * bd.g[k][j];
      if (weight == 0.0) continue;
      double lam = mg.green(alpha, rho);
      double dlam = mg.green_d_alpha(alpha, rho);
      if (!full) {
        const double lead = sb_alpha * std::sqrt(p(rho)) * std::pow(std::min(alpha / rho, rho / alpha), l) / (2.0 * l);
        const double dlead = lead * (db_alpha / (2.0 * b_alpha) + (alpha < rho ? l / alpha : -l / alpha));
        lam -= lead;
        dlam -= dlead;
      }
      s += weight * lam;
      ds += weight * dlam;
    }
    out.psi[k - 1] = s;
    out.dpsi[k - 1] = ds;
  }
  return out;
}

const std::vector<double>& PatchEvaluator::kress_weights(std::size_t n) const {
  std::lock_guard lock(mutex_);
  auto& w = kress_[n];
  if (w.empty()) {
    const std::size_t half = n / 2;
    w.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      double sum = 0.0;
      for (std::size_t q = 1; q < half; ++q)
        sum += std::cos(2.0 * kPi * static_cast<double>(q * k % n) / static_cast<double>(n)) / static_cast<double>(q);
      const double sign = (k % 2 == 0) ? 1.0 : -1.0;
      w[k] = -(2.0 * kPi / static_cast<double>(half)) * sum -
             kPi / static_cast<double>(half * half) * sign;
    }
  }
  return w;
}

BoundaryTrace PatchEvaluator::trace(const FourierContour& domain, const FourierContour& on, bool with_values,
                                    std::size_t nodes) const {
  domain.validate();
  on.validate();
  const int m = on.m();
  const std::size_t n = nodes > 0 ? nodes : theta_nodes(m);
  if (n % 2 != 0) throw ConfigError("stream_on_boundary: node count must be even");
  const bool symmetric = options_.exploit_symmetry && domain.m() == m && n % (2 * static_cast<std::size_t>(m)) == 0;
  const std::size_t period = n / static_cast<std::size_t>(m);
  const std::size_t half = period / 2;
  const double h = 2.0 * kPi / static_cast<double>(n);
  const bool self = same_contour(domain, on);
  const int l_max = this->l_max(m) - this->l_max(m) % domain.m();
  const bool split = options_.method == StreamMethod::split_kernel;
  const bool constant = profile_.is_constant();

  BoundaryTrace out;
  out.theta.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.theta[i] = h * static_cast<double>(i);
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < n; ++i)
    if (!symmetric || i <= half) active.push_back(i);

  // Source (index) and parity of every node with respect to the active set.
  const auto source_of = [&](std::size_t i) -> std::pair<std::size_t, double> {
    if (!symmetric) return {i, 1.0};
    const std::size_t r = i % period;
    if (r <= half) return {r, 1.0};
    return {period - r, -1.0};
  };

  std::vector<double> dpsi(n, 0.0), value(n, 0.0);
  std::vector<double> radius(n), dradius(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto d = on.radius_derivatives(out.theta[i]);
    radius[i] = d[0];
    dradius[i] = d[1];
  }

  if (split) {
    // Log part sqrt(b(x)) * Phi(x) with Phi the logarithmic potential of b^{3/2} 1_D.
    std::vector<double> yx(n), yy(n), dyx(n), dyy(n), d2yx(n), d2yy(n), wv(n), wslope(n), nx(n), ny(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double t = h * static_cast<double>(j);
      const auto [big, d1, d2] = domain.radius_derivatives(t);
      const double c = std::cos(t), s = std::sin(t);
      yx[j] = big * c;
      yy[j] = big * s;
      dyx[j] = d1 * c - big * s;
      dyy[j] = d1 * s + big * c;
      d2yx[j] = (d2 - big) * c - 2.0 * d1 * s;
      d2yy[j] = (d2 - big) * s + 2.0 * d1 * c;
      nx[j] = dyy[j];
      ny[j] = -dyx[j];
      wv[j] = potential_.value(big);
      const double radial_normal = (yx[j] * nx[j] + yy[j] * ny[j]) / big;
      wslope[j] = potential_.slope(big) * radial_normal;
    }
    const std::vector<double>* kress = self ? &kress_weights(n) : nullptr;
    std::vector<double> trace_log(n, 0.0);
    for (std::size_t i : active) {
      const double t = out.theta[i];
      const double xx = radius[i] * std::cos(t);
      const double xy = radius[i] * std::sin(t);
      double double_layer = 0.0, single_layer = 0.0;
      double c = 0.0;
      if (self) {
        c = kPi;
        for (std::size_t j = 0; j < n; ++j) {
          if (j == i) {
            const double speed2 = dyx[j] * dyx[j] + dyy[j] * dyy[j];
            double_layer += h * wv[j] * (dyx[j] * d2yy[j] - dyy[j] * d2yx[j]) / (2.0 * speed2);
            single_layer += (0.5 * (*kress)[0] + h * 0.5 * std::log(speed2)) * wslope[j];
            continue;
          }
          const double rx = yx[j] - xx, ry = yy[j] - xy;
          const double dist2 = rx * rx + ry * ry;
          double_layer += h * wv[j] * (rx * nx[j] + ry * ny[j]) / dist2;
          const std::size_t k = i > j ? i - j : j - i;
          const double sn = std::sin(0.5 * (t - h * static_cast<double>(j)));
          const double smooth = 0.5 * std::log(dist2 / (4.0 * sn * sn));
          single_layer += (0.5 * (*kress)[k] + h * smooth) * wslope[j];
        }
      } else {
        c = radius[i] < domain.radius(t) ? 2.0 * kPi : 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          const double rx = yx[j] - xx, ry = yy[j] - xy;
          const double dist2 = rx * rx + ry * ry;
          double_layer += h * wv[j] * (rx * nx[j] + ry * ny[j]) / dist2;
          single_layer += h * 0.5 * std::log(dist2) * wslope[j];
        }
      }
      const double integral = c * potential_.value(radius[i]) - double_layer + single_layer;
      trace_log[i] = -std::sqrt(profile_(radius[i])) * integral / (2.0 * kPi);
    }
    for (std::size_t i = 0; i < n; ++i) trace_log[i] = trace_log[source_of(i).first];
    // Spectral differentiation of the periodic trace.
    std::vector<double> cs(n), sn(n);
    for (std::size_t k = 0; k < n; ++k) {
      cs[k] = std::cos(h * static_cast<double>(k));
      sn[k] = std::sin(h * static_cast<double>(k));
    }
    const std::size_t top = n / 2;
    std::vector<double> ak(top, 0.0), bk(top, 0.0);
    for (std::size_t k = 1; k < top; ++k) {
      double sa = 0.0, sb = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const std::size_t idx = (k * j) % n;
        sa += trace_log[j] * cs[idx];
        sb += trace_log[j] * sn[idx];
      }
      ak[k] = 2.0 * sa / static_cast<double>(n);
      bk[k] = 2.0 * sb / static_cast<double>(n);
    }
    for (std::size_t i : active) {
      double d = 0.0;
      for (std::size_t k = 1; k < top; ++k) {
        const std::size_t idx = (k * i) % n;
        d += static_cast<double>(k) * (bk[k] * cs[idx] - ak[k] * sn[idx]);
      }
      dpsi[i] = d;
      value[i] = trace_log[i];
    }
  }

  if (!split || !constant) {
    for (std::size_t i : active) {
      const double alpha = radius[i];
      const Band bd = band(domain, alpha, l_max);
      const RadialData rd = radial(domain, bd, alpha, !split, with_values);
      const double t = out.theta[i];
      double d = rd.dpsi0 * dradius[i];
      double v = rd.psi0;
      for (std::size_t k = 0; k < rd.psi.size(); ++k) {
        const int l = static_cast<int>(k + 1) * domain.m();
        const double c = std::cos(l * t), s = std::sin(l * t);
        d += rd.dpsi[k] * dradius[i] * c - l * rd.psi[k] * s;
        v += rd.psi[k] * c;
      }
      dpsi[i] += d;
      value[i] += v;
    }
  } else if (with_values) {
    for (std::size_t i : active) {
      const Band bd = band(domain, radius[i], 0);
      value[i] += radial(domain, bd, radius[i], false, true).psi0;
    }
  }

  out.dtheta.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto [src, parity] = source_of(i);
    out.dtheta[i] = parity * dpsi[src];
  }
  if (with_values) {
    out.value.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.value[i] = value[source_of(i).first];
  }
  return out;
}

StreamPoint PatchEvaluator::point(const FourierContour& domain, double rho, double theta, int l_max) const {
  if (!(rho > 0.0)) throw ConfigError("stream point: radius must be positive");
  const int lm = l_max - l_max % domain.m();
  const Band bd = band(domain, rho, lm);
  const RadialData rd = radial(domain, bd, rho, true, true);
  StreamPoint out{rd.psi0, rd.dpsi0, 0.0};
  for (std::size_t k = 0; k < rd.psi.size(); ++k) {
    const int l = static_cast<int>(k + 1) * domain.m();
    const double c = std::cos(l * theta), s = std::sin(l * theta);
    out.psi += rd.psi[k] * c;
    out.d_rho += rd.dpsi[k] * c;
    out.d_theta -= l * rd.psi[k] * s;
  }
  return out;
}

}  // namespace lakevort
