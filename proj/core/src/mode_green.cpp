#include "lakevort/mode_green.hpp"

#include <algorithm>
#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <string>

#include "lakevort/error.hpp"
#include "lakevort/quadrature.hpp"

namespace lakevort {

namespace {

using State = std::array<double, 2>;
namespace odeint = boost::numeric::odeint;

/// Integrates the scaled system through the given log-radius stations.
/// direction = +1 gives the regular solution in t = ln r, direction = -1 the
/// decaying one in tau = -ln r.
void integrate_scaled(const DepthProfile& p, int n, int direction, State start,
                      const std::vector<double>& times, double rel_tol,
                      std::vector<State>& states) {
  const double nn = static_cast<double>(n);
  const auto rhs = [&](const State& x, State& dx, double s) {
    const double r = std::exp(direction * s);
    const double b = p(r);
    if (direction > 0) {
      dx[0] = b * x[1] - nn * x[0];
      dx[1] = nn * nn * x[0] / b - nn * x[1];
    } else {
      dx[0] = -(b * x[1] + nn * x[0]);
      dx[1] = -(nn * nn * x[0] / b + nn * x[1]);
    }
  };
  states.clear();
  states.reserve(times.size());
  const auto observer = [&](const State& x, double) { states.push_back(x); };
  auto stepper = odeint::make_controlled(rel_tol * 1e-2, rel_tol, odeint::runge_kutta_dopri5<State>());
  const double dt0 = 0.1 / std::max(1.0, nn);
  odeint::integrate_times(stepper, rhs, start, times.begin(), times.end(), dt0, observer);
  if (states.size() != times.size())
    throw NumericalError("homogeneous_pair: ODE integration stopped early for n = " +
                         std::to_string(n));
}

}  // namespace

ModeGreen::ModeGreen(const DepthProfile& p, int n, const RadialGrid& grid, double rel_tol)
    : n_(n), grid_(grid) {
  if (n < 1) throw ConfigError("homogeneous_pair: mode n must be >= 1");
  if (grid.r_out() < p.r_inf())
    throw ConfigError("homogeneous_pair: grid must extend to r_inf = " + std::to_string(p.r_inf()));
  const std::size_t count = grid.size();
  const double nn = static_cast<double>(n);

  std::vector<double> times(count);
  for (std::size_t i = 0; i < count; ++i) times[i] = std::log(grid[i]);
  std::vector<State> minus;
  integrate_scaled(p, n, +1, {1.0, nn / p(grid.r_min())}, times, rel_tol, minus);

  std::vector<double> back_times(count);
  for (std::size_t i = 0; i < count; ++i) back_times[i] = -times[count - 1 - i];
  std::vector<State> plus_rev;
  integrate_scaled(p, n, -1, {1.0, -nn / p.b_inf()}, back_times, rel_tol, plus_rev);

  phi_m_.resize(count);
  dphi_m_.resize(count);
  phi_p_.resize(count);
  dphi_p_.resize(count);
  std::vector<double> abel(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double r = grid[i];
    const double b = p(r);
    const State& m = minus[i];
    const State& q = plus_rev[count - 1 - i];
    phi_m_[i] = m[0];
    dphi_m_[i] = (b * m[1] - nn * m[0]) / r;
    phi_p_[i] = q[0];
    dphi_p_[i] = (b * q[1] + nn * q[0]) / r;
    abel[i] = m[1] * q[0] - m[0] * q[1];
  }
  c_ = abel[count / 2];
  if (!(c_ > 0.0) || !std::isfinite(c_))
    throw NumericalError("homogeneous_pair: normalisation constant is not positive for n = " +
                         std::to_string(n));
  for (double v : abel) abel_dev_ = std::max(abel_dev_, std::abs(v - c_) / c_);
  if (abel_dev_ > 1e-6)
    throw NumericalError("homogeneous_pair: Abel identity violated (relative deviation " +
                         std::to_string(abel_dev_) + ") for n = " + std::to_string(n));
}

ModeValue ModeGreen::eval(const std::vector<double>& phi, const std::vector<double>& dphi,
                          double r) const {
  if (r > grid_.r_out() * (1.0 + 1e-12))
    throw ConfigError("ModeGreen: radius " + std::to_string(r) + " beyond r_out = " +
                      std::to_string(grid_.r_out()));
  const double rr = std::clamp(r, grid_.r_min(), grid_.r_out());
  const std::size_t i = grid_.interval(rr);
  const double x0 = grid_[i];
  const double h = grid_[i + 1] - x0;
  const double t = (rr - x0) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double value = (2 * t3 - 3 * t2 + 1) * phi[i] + (t3 - 2 * t2 + t) * h * dphi[i] +
                       (-2 * t3 + 3 * t2) * phi[i + 1] + (t3 - t2) * h * dphi[i + 1];
  const double slope = ((6 * t2 - 6 * t) * phi[i] + (3 * t2 - 4 * t + 1) * h * dphi[i] +
                        (-6 * t2 + 6 * t) * phi[i + 1] + (3 * t2 - 2 * t) * h * dphi[i + 1]) /
                       h;
  return {value, slope};
}

ModeValue ModeGreen::phi_minus(double r) const { return eval(phi_m_, dphi_m_, r); }

ModeValue ModeGreen::phi_plus(double r) const { return eval(phi_p_, dphi_p_, r); }

double ModeGreen::log_slope_minus(double r) const {
  const ModeValue v = phi_minus(r);
  return n_ / r + v.slope / v.value;
}

double ModeGreen::log_slope_plus(double r) const {
  const ModeValue v = phi_plus(r);
  return -n_ / r + v.slope / v.value;
}

double ModeGreen::green(double alpha, double beta) const {
  if (!(alpha > 0.0) || !(beta > 0.0)) throw ConfigError("green_lambda: radii must be positive");
  const double lo = std::min(alpha, beta);
  const double hi = std::max(alpha, beta);
  return std::pow(lo / hi, n_) * phi_minus(lo).value * phi_plus(hi).value / c_;
}

double ModeGreen::green_d_alpha(double alpha, double beta) const {
  if (alpha <= beta) {
    const ModeValue m = phi_minus(alpha);
    return std::pow(alpha / beta, n_) * phi_plus(beta).value / c_ *
           (n_ / alpha * m.value + m.slope);
  }
  const ModeValue q = phi_plus(alpha);
  return std::pow(beta / alpha, n_) * phi_minus(beta).value / c_ *
         (-n_ / alpha * q.value + q.slope);
}

RadialFunction ModeGreen::u_minus() const {
  RadialFunction out{grid_, {}, {}, -n_};
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    const double r = grid_[i];
    const double rn = std::pow(r, n_);
    out.values.push_back(rn * phi_m_[i]);
    out.derivatives.push_back(rn * (n_ / r * phi_m_[i] + dphi_m_[i]));
  }
  return out;
}

RadialFunction ModeGreen::u_plus() const {
  RadialFunction out{grid_, {}, {}, n_};
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    const double r = grid_[i];
    const double rn = std::pow(r, -n_);
    out.values.push_back(rn * phi_p_[i]);
    out.derivatives.push_back(rn * (-n_ / r * phi_p_[i] + dphi_p_[i]));
  }
  return out;
}

ModeGreen homogeneous_pair(const DepthProfile& p, int n, const RadialGrid& grid) {
  return ModeGreen(p, n, grid);
}

double green_lambda(const ModeGreen& mg, double alpha, double beta) { return mg.green(alpha, beta); }

RadialFunction solve_mode_n(const ModeGreen& mg, const RadialSource& g) {
  constexpr std::size_t kOrder = 8;
  const RadialGrid& grid = mg.grid();
  const std::size_t count = grid.size();
  const int n = mg.mode();
  std::vector<double> cuts(g.breakpoints);
  std::sort(cuts.begin(), cuts.end());

  const auto piecewise = [&](const std::function<double(double)>& f, double lo, double hi) {
    double total = 0.0;
    double a = lo;
    for (double c : cuts) {
      if (c <= a || c >= hi) continue;
      total += gauss_integrate(f, a, c, kOrder);
      a = c;
    }
    return total + gauss_integrate(f, a, hi, kOrder);
  };

  // Scaled cumulative integrals: inner[i] = int_{r_min}^{r_i} (rho/r_i)^n phi_- g rho,
  // outer[i] = int_{r_i}^{r_out} (r_i/rho)^n phi_+ g rho.
  std::vector<double> inner(count, 0.0), outer(count, 0.0);
  for (std::size_t i = 1; i < count; ++i) {
    const double a = grid[i - 1];
    const double b = grid[i];
    const double piece = piecewise(
        [&](double rho) { return std::pow(rho / b, n) * mg.phi_minus(rho).value * g.f(rho) * rho; },
        a, b);
    inner[i] = std::pow(a / b, n) * inner[i - 1] + piece;
  }
  for (std::size_t i = count - 1; i-- > 0;) {
    const double a = grid[i];
    const double b = grid[i + 1];
    const double piece = piecewise(
        [&](double rho) { return std::pow(a / rho, n) * mg.phi_plus(rho).value * g.f(rho) * rho; },
        a, b);
    outer[i] = std::pow(a / b, n) * outer[i + 1] + piece;
  }

  RadialFunction out{grid, {}, {}, n};
  out.values.resize(count);
  out.derivatives.resize(count);
  const double c = mg.normalization();
  for (std::size_t i = 0; i < count; ++i) {
    const double r = grid[i];
    const ModeValue m = mg.phi_minus(r);
    const ModeValue q = mg.phi_plus(r);
    out.values[i] = (q.value * inner[i] + m.value * outer[i]) / c;
    out.derivatives[i] =
        ((-n / r * q.value + q.slope) * inner[i] + (n / r * m.value + m.slope) * outer[i]) / c;
  }
  return out;
}

RadialFunction solve_mode_n(const ModeGreen& mg, const RadialFunction& g) {
  const double lo = g.grid.r_min();
  const double hi = g.grid.r_out();
  RadialSource source{[&g, lo, hi](double r) { return (r < lo || r > hi) ? 0.0 : g(r); }, {}};
  return solve_mode_n(mg, source);
}

GreenCache::GreenCache(DepthProfile p, RadialGrid grid)
    : profile_(std::move(p)), grid_(std::move(grid)) {}

const ModeGreen& GreenCache::get(int n) const {
  {
    std::lock_guard lock(mutex_);
    auto it = cache_.find(n);
    if (it != cache_.end()) return *it->second;
  }
  auto fresh = std::make_unique<ModeGreen>(profile_, n, grid_);
  std::lock_guard lock(mutex_);
  auto& slot = cache_[n];
  if (!slot) slot = std::move(fresh);
  return *slot;
}

}  // namespace lakevort
