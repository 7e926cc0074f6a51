#include "lakevort/spectral.hpp"

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "lakevort/error.hpp"
#include "lakevort/parallel.hpp"
#include "lakevort/quadrature.hpp"

namespace lakevort {

namespace {

double pow_ratio(double r, double s, int n) {
  if (r <= 0.0 || s <= 0.0) return 0.0;
  return std::pow(std::min(r / s, s / r), n);
}

bool degenerate(double delta, double d, double lambda12) {
  const double scale = std::max(d * d, 4.0 * lambda12 * lambda12);
  return !(delta > 64.0 * std::numeric_limits<double>::epsilon() * scale);
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double min_ratio(double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0)) throw ConfigError("min_ratio: radii must be positive");
  return std::min(alpha / beta, beta / alpha);
}

double u_n_integral(const std::function<double(double)>& theta, double support_end, int n,
                    double alpha, double beta) {
  if (n < 1) throw ConfigError("u_n_integral: n must be >= 1");
  if (!(alpha > 0.0) || !(beta > 0.0)) throw ConfigError("u_n_integral: radii must be positive");
  const auto integrand = [&](double r) {
    return theta(r) * pow_ratio(r, alpha, n) * pow_ratio(r, beta, n);
  };
  const double cuts[] = {std::min(alpha, beta), std::max(alpha, beta)};
  if (std::isfinite(support_end)) return adaptive_integrate(integrand, 0.0, support_end, 1e-13, cuts);
  const double hi = std::max(alpha, beta);
  const double head = adaptive_integrate(integrand, 0.0, hi, 1e-13, cuts);
  boost::math::quadrature::exp_sinh<double> tail_rule;
  const double tail = tail_rule.integrate([&](double t) { return integrand(hi + t); }, 1e-13);
  return head + tail;
}

double u_n_integral(const DepthProfile& p, int n, double alpha, double beta) {
  if (p.is_constant()) return 0.0;
  return u_n_integral([&p](double r) { return p.theta(r); }, p.r_inf(), n, alpha, beta);
}

FixedPointSolver::FixedPointSolver(const DepthProfile& p, int n, std::vector<double> radii,
                                   std::size_t base_nodes)
    : profile_(p), n_(n) {
  if (n < 1) throw ConfigError("fn_fixed_point: n must be >= 1");
  if (radii.empty()) throw ConfigError("fn_fixed_point: need at least one radius");
  if (base_nodes < 16) throw ConfigError("fn_fixed_point: need at least 16 nodes");
  extent_ = p.r_inf();
  for (double r : radii) {
    if (!(r > 0.0)) throw ConfigError("fn_fixed_point: radii must be positive");
    extent_ = std::max(extent_, r);
  }
  breakpoints_ = std::move(radii);
  breakpoints_.push_back(0.0);
  breakpoints_.push_back(p.r_inf());
  std::sort(breakpoints_.begin(), breakpoints_.end());
  breakpoints_.erase(std::unique(breakpoints_.begin(), breakpoints_.end()), breakpoints_.end());
  spacing_ = extent_ / static_cast<double>(base_nodes);
  levels_.push_back(build_level(1));
  levels_.push_back(build_level(2));
}

FixedPointSolver::Level FixedPointSolver::build_level(std::size_t refine) const {
  Level level;
  level.r.push_back(0.0);
  for (std::size_t k = 0; k + 1 < breakpoints_.size(); ++k) {
    const double a = breakpoints_[k];
    const double b = breakpoints_[k + 1];
    const auto panels =
        refine * std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((b - a) / spacing_ - 1e-9)));
    for (std::size_t j = 1; j <= panels; ++j)
      level.r.push_back(j == panels ? b : a + (b - a) * static_cast<double>(j) / static_cast<double>(panels));
  }
  const std::size_t count = level.r.size();
  level.weight.assign(count, 0.0);
  for (std::size_t j = 0; j + 1 < count; ++j) {
    const double h = level.r[j + 1] - level.r[j];
    level.weight[j] += 0.5 * h;
    level.weight[j + 1] += 0.5 * h;
  }
  level.sqrt_b.resize(count);
  level.theta.resize(count);
  for (std::size_t j = 0; j < count; ++j) {
    level.sqrt_b[j] = std::sqrt(profile_(level.r[j]));
    level.theta[j] = profile_.theta(level.r[j]);
  }
  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(count, count);
  const double inv2n = 1.0 / (2.0 * n_);
  for (std::size_t i = 0; i < count; ++i) {
    const double row_scale = level.sqrt_b[i] * inv2n;
    for (std::size_t j = 0; j < count; ++j) {
      if (level.theta[j] == 0.0) continue;
      system(i, j) += row_scale * level.weight[j] * level.theta[j] * pow_ratio(level.r[j], level.r[i], n_);
    }
  }
  level.lu.compute(system);
  const double rcond = level.lu.rcond();
  if (!(rcond > 1e-13))
    throw NumericalError("fn_fixed_point: Nystrom matrix is singular for n = " + std::to_string(n_) +
                         " (rcond " + std::to_string(rcond) + ")");
  return level;
}

std::size_t FixedPointSolver::index_of(const Level& level, double r) const {
  const auto it = std::lower_bound(level.r.begin(), level.r.end(), r);
  if (it == level.r.end() || std::abs(*it - r) > 1e-14 * std::max(1.0, r))
    throw ConfigError("fn_fixed_point: radius " + std::to_string(r) +
                      " was not registered at construction");
  return static_cast<std::size_t>(it - level.r.begin());
}

Eigen::VectorXd FixedPointSolver::solve_level(const Level& level, double alpha) const {
  index_of(level, alpha);
  const std::size_t count = level.r.size();
  const double sqrt_ba = std::sqrt(profile_(alpha));
  const double scale = sqrt_ba / (4.0 * n_ * n_);
  std::vector<double> column(count);
  for (std::size_t j = 0; j < count; ++j)
    column[j] = level.weight[j] * level.theta[j] * level.sqrt_b[j] * pow_ratio(level.r[j], alpha, n_);
  Eigen::VectorXd rhs(count);
  for (std::size_t i = 0; i < count; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < count; ++j)
      if (column[j] != 0.0) sum += column[j] * pow_ratio(level.r[j], level.r[i], n_);
    rhs(static_cast<Eigen::Index>(i)) = -scale * level.sqrt_b[i] * sum;
  }
  return level.lu.solve(rhs);
}

std::vector<double> FixedPointSolver::solve(double alpha) const {
  const Eigen::VectorXd coarse = solve_level(levels_[0], alpha);
  const Eigen::VectorXd fine = solve_level(levels_[1], alpha);
  std::vector<double> out(levels_[0].r.size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    const std::size_t k = index_of(levels_[1], levels_[0].r[j]);
    out[j] = (4.0 * fine(static_cast<Eigen::Index>(k)) - coarse(static_cast<Eigen::Index>(j))) / 3.0;
  }
  return out;
}

double FixedPointSolver::value(double alpha, double beta) const {
  const Eigen::VectorXd coarse = solve_level(levels_[0], alpha);
  const Eigen::VectorXd fine = solve_level(levels_[1], alpha);
  const auto i = static_cast<Eigen::Index>(index_of(levels_[0], beta));
  const auto k = static_cast<Eigen::Index>(index_of(levels_[1], beta));
  return (4.0 * fine(k) - coarse(i)) / 3.0;
}

SpectralContext::SpectralContext(DepthProfile p, std::vector<double> radii, SpectralOptions options)
    : profile_(std::move(p)), radii_(std::move(radii)), options_(options) {
  if (radii_.empty()) throw ConfigError("spectral: need at least one radius");
  double max_radius = 0.0;
  for (double r : radii_) {
    if (!(r > 0.0)) throw ConfigError("spectral: radii must be positive");
    max_radius = std::max(max_radius, r);
  }
  RadialGrid grid = RadialGrid::for_profile(profile_, max_radius, options_.n_r);
  if (options_.r_out > 0.0) {
    if (options_.r_out < std::max(profile_.r_inf(), max_radius))
      throw ConfigError("spectral: r_out must cover r_inf and every radius");
    grid = RadialGrid::uniform(1e-6 * profile_.r_inf(), options_.r_out, options_.n_r);
  }
  greens_ = std::make_unique<GreenCache>(profile_, std::move(grid));
}

const FixedPointSolver& SpectralContext::fixed_point(int n) const {
  {
    std::lock_guard lock(mutex_);
    auto it = fixed_.find(n);
    if (it != fixed_.end()) return *it->second;
  }
  auto fresh = std::make_unique<FixedPointSolver>(profile_, n, radii_, options_.nystrom_nodes);
  std::lock_guard lock(mutex_);
  auto& slot = fixed_[n];
  if (!slot) slot = std::move(fresh);
  return *slot;
}

double SpectralContext::lambda(int n, double alpha, double beta, LambdaRoute route) const {
  if (n < 1) throw ConfigError("lambda_n: n must be >= 1");
  if (route == LambdaRoute::green) return greens_->get(n).green(alpha, beta);
  const double lead =
      std::sqrt(profile_(alpha) * profile_(beta)) * std::pow(min_ratio(alpha, beta), n) / (2.0 * n);
  if (profile_.is_constant()) return lead;
  return lead + fixed_point(n).value(alpha, beta);
}

double SpectralContext::f(int n, double alpha, double beta, LambdaRoute route) const {
  if (route == LambdaRoute::fixedpoint) {
    if (profile_.is_constant()) return 0.0;
    return fixed_point(n).value(alpha, beta);
  }
  const double lead =
      std::sqrt(profile_(alpha) * profile_(beta)) * std::pow(min_ratio(alpha, beta), n) / (2.0 * n);
  return lambda(n, alpha, beta) - lead;
}

double SpectralContext::route_difference(int n, double alpha, double beta) const {
  const double g = lambda(n, alpha, beta, LambdaRoute::green);
  const double fp = lambda(n, alpha, beta, LambdaRoute::fixedpoint);
  return std::abs(g - fp) / std::abs(g);
}

double SpectralContext::lambda_checked(int n, double alpha, double beta) const {
  const double diff = route_difference(n, alpha, beta);
  if (!(diff <= options_.crosscheck_tol))
    throw CrossCheckError("lambda_n: Green and fixed-point routes differ by " + std::to_string(diff) +
                          " (relative) at n = " + std::to_string(n));
  return lambda(n, alpha, beta);
}

int SpectralContext::contraction_mode(double alpha, double beta) const {
  const double a = std::max({alpha, beta, profile_.r_inf()});
  return std::max(1, static_cast<int>(std::ceil(a * profile_.theta_sup() / 2.0)));
}

double lambda_n(const DepthProfile& p, int n, double alpha, double beta, LambdaRoute route) {
  SpectralContext ctx(p, {alpha, beta});
  return ctx.lambda(n, alpha, beta, route);
}

double threshold_M(const DepthProfile& p, double alpha, double beta) {
  if (p.is_constant()) return 0.0;
  const double a = std::max({alpha, beta, p.r_inf()});
  return 16.0 * a * p.theta_sup() * std::max(1.0, 1.0 / std::sqrt(p(alpha)));
}

double fn_bound(const DepthProfile& p, int n, double alpha, double beta) {
  if (n < 1) throw ConfigError("fn_bound: n must be >= 1");
  const double a = std::max({alpha, beta, p.r_inf()});
  const double diagonal = alpha == beta ? 1.0 / n - 1.0 : 0.0;
  return 2.0 * a * std::sqrt(p(beta)) * std::pow(min_ratio(alpha, beta), n) / (static_cast<double>(n) * n) *
         (diagonal + 1.0) * p.theta_sup();
}

double omega_simply(const SpectralContext& ctx, double a, int m) {
  if (m < 1) throw ConfigError("omega_simply: m must be >= 1");
  return ctx.q(a, 0.0) - ctx.lambda(m, a, a);
}

DoublySpectrum omega_doubly_unchecked(const SpectralContext& ctx, double a1, double a2, int m) {
  if (!(a2 > 0.0) || !(a1 > a2)) throw ConfigError("omega_doubly: need 0 < a2 < a1");
  if (m < 1) throw ConfigError("omega_doubly: m must be >= 1");
  const double q = ctx.q(a1, a2);
  const double l11 = ctx.lambda(m, a1, a1);
  const double l22 = ctx.lambda(m, a2, a2);
  const double l12 = ctx.lambda(m, a1, a2);
  const double d = q - l11 - l22;
  DoublySpectrum out;
  out.delta = d * d - 4.0 * l12 * l12;
  const double centre = 0.5 * q + 0.5 * (l22 - l11);
  const double root = out.delta > 0.0 ? 0.5 * std::sqrt(out.delta) : std::numeric_limits<double>::quiet_NaN();
  out.omega_minus = centre - root;
  out.omega_plus = centre + root;
  if (degenerate(out.delta, d, l12)) {
    out.omega_minus = std::numeric_limits<double>::quiet_NaN();
    out.omega_plus = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

DoublySpectrum omega_doubly(const SpectralContext& ctx, double a1, double a2, int m) {
  const DoublySpectrum s = omega_doubly_unchecked(ctx, a1, a2, m);
  if (std::isnan(s.omega_plus))
    throw DegenerateSpectrumError("omega_doubly: degenerate or complex spectrum at m = " +
                                  std::to_string(m) + " (Delta = " + format_number(s.delta) + ")");
  return s;
}

ThresholdReport find_threshold_N(const SpectralContext& ctx, double a1, double a2, int window,
                                 int n_max) {
  if (window < 1) throw ConfigError("find_threshold_N: window must be positive");
  const int top = n_max + window + 1;
  const double q = ctx.q(a1, a2);
  std::vector<char> good(static_cast<std::size_t>(top) + 1, 0);
  std::vector<double> plus(static_cast<std::size_t>(top) + 1), minus(static_cast<std::size_t>(top) + 1);
  std::vector<std::string> reason(static_cast<std::size_t>(top) + 1);
  for (int n = 1; n <= top; ++n) {
    const DoublySpectrum s = omega_doubly_unchecked(ctx, a1, a2, n);
    const double l11 = ctx.lambda(n, a1, a1);
    const double l22 = ctx.lambda(n, a2, a2);
    const auto k = static_cast<std::size_t>(n);
    plus[k] = s.omega_plus;
    minus[k] = s.omega_minus;
    if (std::isnan(s.omega_plus))
      reason[k] = "Delta_" + std::to_string(n) + " = " + format_number(s.delta) + " is not positive";
    else if (!(q > l11 + l22))
      reason[k] = "Q <= Lambda_" + std::to_string(n) + "(a1,a1) + Lambda_" + std::to_string(n) + "(a2,a2)";
    else
      good[k] = 1;
  }
  for (int n0 = 1; n0 <= n_max; ++n0) {
    bool ok = true;
    for (int n = n0; n <= n0 + window && ok; ++n) {
      const auto k = static_cast<std::size_t>(n);
      if (!good[k]) ok = false;
      if (ok && n < n0 + window && !(plus[k + 1] > plus[k] && minus[k + 1] < minus[k])) {
        ok = false;
        reason[k] = "Omega^+- not monotone between n = " + std::to_string(n) + " and " + std::to_string(n + 1);
      }
    }
    if (ok) {
      ThresholdReport report{n0, window, {}};
      for (int n = 1; n < n0; ++n)
        if (!reason[static_cast<std::size_t>(n)].empty()) report.diagnostics.push_back(reason[static_cast<std::size_t>(n)]);
      report.diagnostics.push_back("Delta_n > 0, Q > Lambda_n(a1,a1) + Lambda_n(a2,a2) and monotone Omega^+- for n in [" +
                                   std::to_string(n0) + ", " + std::to_string(n0 + window) + "]");
      return report;
    }
  }
  std::ostringstream msg;
  msg << "find_threshold_N: no admissible n0 <= " << n_max << " with window " << window;
  for (int n = top; n >= 1; --n)
    if (!reason[static_cast<std::size_t>(n)].empty()) {
      msg << "; last failure: " << reason[static_cast<std::size_t>(n)];
      break;
    }
  throw NumericalError(msg.str());
}

MatrixMn matrix_Mn(const SpectralContext& ctx, double omega, double a1, double a2, int n) {
  if (!(a2 > 0.0) || !(a1 > a2)) throw ConfigError("matrix_Mn: need 0 < a2 < a1");
  const DepthProfile& p = ctx.profile();
  const double q = ctx.q(a1, a2);
  const double l11 = ctx.lambda(n, a1, a1);
  const double l22 = ctx.lambda(n, a2, a2);
  const double l12 = ctx.lambda(n, a1, a2);
  const double b1 = p(a1);
  const double b2 = p(a2);
  MatrixMn out;
  out.matrix << omega - q + l11, -(b2 / b1) * l12, (b1 / b2) * l12, omega - l22;
  out.det = out.matrix.determinant();
  return out;
}

Eigen::Vector2d kernel_generator(const SpectralContext& ctx, double a1, double a2, int m, Branch branch) {
  const DoublySpectrum s = omega_doubly(ctx, a1, a2, m);
  const double omega = branch == Branch::plus ? s.omega_plus : s.omega_minus;
  const DepthProfile& p = ctx.profile();
  return {omega - ctx.lambda(m, a2, a2), -(p(a1) / p(a2)) * ctx.lambda(m, a1, a2)};
}

SpectralTable build_spectral_table(const SpectralContext& ctx, const std::vector<double>& radii,
                                   int n_max, bool compare_routes, int jobs) {
  if (radii.size() != 1 && radii.size() != 2) throw ConfigError("spectral table: need one or two radii");
  if (n_max < 1) throw ConfigError("spectral table: n_max must be >= 1");
  SpectralTable table;
  table.profile = ctx.profile().to_json();
  table.radii = radii;
  table.rows.resize(static_cast<std::size_t>(n_max));
  const double a1 = radii[0];
  const double a2 = radii.size() == 2 ? radii[1] : radii[0];
  const int contraction = ctx.contraction_mode(a1, a2);
  const bool constant = ctx.profile().is_constant();
  parallel_for(static_cast<std::size_t>(n_max), jobs, [&](std::size_t idx) {
    const int n = static_cast<int>(idx) + 1;
    SpectralRow row;
    row.n = n;
    row.lambda11 = ctx.lambda(n, a1, a1);
    row.f11 = ctx.f(n, a1, a1);
    row.route_difference = std::numeric_limits<double>::quiet_NaN();
    const bool check = compare_routes && !constant && n >= contraction;
    if (check) row.route_difference = ctx.route_difference(n, a1, a1);
    if (table.doubly()) {
      row.lambda22 = ctx.lambda(n, a2, a2);
      row.lambda12 = ctx.lambda(n, a1, a2);
      row.f22 = ctx.f(n, a2, a2);
      row.f12 = ctx.f(n, a1, a2);
      if (check)
        row.route_difference = std::max({row.route_difference, ctx.route_difference(n, a2, a2),
                                         ctx.route_difference(n, a1, a2)});
      const DoublySpectrum s = omega_doubly_unchecked(ctx, a1, a2, n);
      row.q = ctx.q(a1, a2);
      row.omega_minus = s.omega_minus;
      row.omega_plus = s.omega_plus;
      row.delta = s.delta;
    } else {
      row.q = ctx.q(a1, 0.0);
      row.omega_plus = row.q - row.lambda11;
      row.omega_minus = row.omega_plus;
    }
    table.rows[idx] = row;
  });
  return table;
}

std::string SpectralTable::to_csv() const {
  std::ostringstream out;
  if (doubly()) {
    out << "n,Lambda_a1a1,Lambda_a2a2,Lambda_a1a2,f_a1a1,f_a2a2,f_a1a2,route_rel_diff,Q,Omega_minus,Omega_plus,Delta\n";
    for (const SpectralRow& r : rows)
      out << r.n << ',' << format_number(r.lambda11) << ',' << format_number(r.lambda22) << ','
          << format_number(r.lambda12) << ',' << format_number(r.f11) << ',' << format_number(r.f22) << ','
          << format_number(r.f12) << ',' << format_number(r.route_difference) << ',' << format_number(r.q)
          << ',' << format_number(r.omega_minus) << ',' << format_number(r.omega_plus) << ','
          << format_number(r.delta) << '\n';
  } else {
    out << "n,Lambda_aa,f_aa,route_rel_diff,Q,Omega\n";
    for (const SpectralRow& r : rows)
      out << r.n << ',' << format_number(r.lambda11) << ',' << format_number(r.f11) << ','
          << format_number(r.route_difference) << ',' << format_number(r.q) << ','
          << format_number(r.omega_plus) << '\n';
  }
  return out.str();
}

}  // namespace lakevort
