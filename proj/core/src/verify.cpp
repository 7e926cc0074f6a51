#include "lakevort/verify.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "lakevort/error.hpp"
#include "lakevort/mode_green.hpp"
#include "lakevort/quadrature.hpp"
#include "lakevort/radial.hpp"

namespace lakevort {

namespace {

constexpr double kPi = std::numbers::pi;

bool inside(const FourierContour& c, double x, double y) {
  const double rho = std::hypot(x, y);
  if (rho < c.min_radius()) return true;
  if (rho > c.max_radius()) return false;
  return rho < c.radius(std::atan2(y, x));
}

/// Average of b over an axis-aligned rectangle by a tensor Gauss rule.
double cell_mean(const DepthProfile& p, double x0, double x1, double y0, double y1) {
  const GaussRule& g = gauss_legendre(4);
  double total = 0.0;
  for (std::size_t a = 0; a < g.nodes.size(); ++a)
    for (std::size_t c = 0; c < g.nodes.size(); ++c) {
      const double x = 0.5 * (x0 + x1) + 0.5 * (x1 - x0) * g.nodes[a];
      const double y = 0.5 * (y0 + y1) + 0.5 * (y1 - y0) * g.nodes[c];
      total += 0.25 * g.weights[a] * g.weights[c] * p(std::hypot(x, y));
    }
  return total;
}

/// Cell extent relative to the origin: nearest and farthest distances.
std::pair<double, double> cell_range(double x0, double x1, double y0, double y1) {
  const double nx = (x0 <= 0.0 && x1 >= 0.0) ? 0.0 : std::min(std::abs(x0), std::abs(x1));
  const double ny = (y0 <= 0.0 && y1 >= 0.0) ? 0.0 : std::min(std::abs(y0), std::abs(y1));
  const double fx = std::max(std::abs(x0), std::abs(x1));
  const double fy = std::max(std::abs(y0), std::abs(y1));
  return {std::hypot(nx, ny), std::hypot(fx, fy)};
}

/// P(rho) = int_0^rho s b(s) ds, tabulated with Hermite interpolation.
class RadialMass {
 public:
  RadialMass(const DepthProfile& p, double max_radius, std::size_t samples = 4096) : p_(p) {
    top_ = std::min(p.r_inf(), max_radius);
    step_ = top_ / static_cast<double>(samples);
    table_.assign(samples + 1, 0.0);
    for (std::size_t i = 0; i < samples; ++i) {
      const double a = step_ * static_cast<double>(i);
      table_[i + 1] = table_[i] + gauss_integrate([&](double s) { return s * p(s); }, a, a + step_, 8);
    }
  }
  double operator()(double r) const {
    if (r >= top_) return table_.back() + 0.5 * p_.b_inf() * (r * r - top_ * top_);
    const auto i = std::min(static_cast<std::size_t>(r / step_), table_.size() - 2);
    const double r0 = step_ * static_cast<double>(i);
    const double t = (r - r0) / step_;
    const double t2 = t * t, t3 = t2 * t;
    const double d0 = r0 * p_(r0), d1 = (r0 + step_) * p_(r0 + step_);
    return (2 * t3 - 3 * t2 + 1) * table_[i] + (t3 - 2 * t2 + t) * step_ * d0 + (-2 * t3 + 3 * t2) * table_[i + 1] +
           (t3 - t2) * step_ * d1;
  }
  /// P(rho) / rho^2 with its limit b(0)/2 at the origin.
  double over_square(double r) const { return r < 1e-8 ? 0.5 * p_(0.0) : (*this)(r) / (r * r); }

 private:
  DepthProfile p_;
  double top_ = 0.0, step_ = 0.0;
  std::vector<double> table_;
};

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const auto count = static_cast<double>(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double lx = std::log(x[k]), ly = std::log(y[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (count * sxy - sx * sy) / (count * sxx - sx * sx);
}

double normalized_radial(const DepthProfile& p, double t) {
  const double r_inf = p.r_inf();
  if (t >= r_inf) return -p.b_inf() * std::log(t);
  const double tail = adaptive_integrate([&p](double s) { return p(s) / s; }, t, r_inf, 1e-13);
  return -p.b_inf() * std::log(r_inf) + tail;
}

}  // namespace

Grid2D::Grid2D(double half_width_, std::size_t n_) : half_width(half_width_), n(n_) {
  if (!(half_width > 0.0)) throw ConfigError("Grid2D: half width must be positive");
  if (n < 5 || n % 2 == 0) throw ConfigError("Grid2D: node count must be odd and at least 5");
}

double Field2D::integral() const {
  double total = 0.0;
  for (double v : values) total += v;
  const double h = grid.spacing();
  return total * h * h;
}

double Field2D::pairing(const Field2D& other) const {
  if (other.grid.n != grid.n || other.grid.half_width != grid.half_width)
    throw ConfigError("Field2D: grids differ");
  double total = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) total += values[k] * other.values[k];
  const double h = grid.spacing();
  return total * h * h;
}

Field2D sample_field(const Grid2D& grid, const PlaneFunction& f) {
  Field2D out(grid);
  for (std::size_t j = 0; j < grid.n; ++j)
    for (std::size_t i = 0; i < grid.n; ++i) out.at(i, j) = f(grid.coord(i), grid.coord(j));
  return out;
}

Field2D patch_source(const Grid2D& grid, const DepthProfile& p, const FourierContour& outer,
                     const FourierContour* inner) {
  outer.validate();
  if (inner) {
    inner->validate();
    if (!nested(outer, *inner)) throw GeometryError("patch_source: inner contour is not nested");
  }
  const double h = grid.spacing();
  const RadialMass mass(p, std::max(outer.max_radius(), grid.half_width * std::sqrt(2.0)));
  const auto in_domain = [&](double x, double y) {
    return inside(outer, x, y) && !(inner && inside(*inner, x, y));
  };
  const auto classify = [&](double lo, double hi) {
    // +1 fully inside D, -1 fully outside, 0 mixed
    if (lo > outer.max_radius()) return -1;
    const bool in_outer = hi < outer.min_radius();
    if (!inner) return in_outer ? 1 : 0;
    if (hi < inner->min_radius()) return -1;
    return (in_outer && lo > inner->max_radius()) ? 1 : 0;
  };
  constexpr int kSamples = 16;

  // Parameters t in (0, 1) where segment a -> b crosses contour c.
  const auto crossings = [&](const FourierContour& c, double ax, double ay, double bx, double by,
                             std::vector<double>& cuts) {
    const auto at = [&](double t) { return inside(c, ax + t * (bx - ax), ay + t * (by - ay)); };
    bool prev = at(0.0);
    for (int k = 1; k <= kSamples; ++k) {
      const double t = static_cast<double>(k) / kSamples;
      const bool now = at(t);
      if (now != prev) {
        double lo = t - 1.0 / kSamples, hi = t;
        for (int it = 0; it < 60 && hi - lo > 1e-16; ++it) {
          const double mid = 0.5 * (lo + hi);
          (at(mid) == prev ? lo : hi) = mid;
        }
        cuts.push_back(0.5 * (lo + hi));
      }
      prev = now;
    }
  };

  Field2D out(grid);
  for (std::size_t j = 0; j < grid.n; ++j) {
    for (std::size_t i = 0; i < grid.n; ++i) {
      const double x0 = grid.coord(i) - 0.5 * h, x1 = x0 + h;
      const double y0 = grid.coord(j) - 0.5 * h, y1 = y0 + h;
      const auto [lo, hi] = cell_range(x0, x1, y0, y1);
      const int kind = classify(lo, hi);
      if (kind < 0) continue;
      if (kind > 0) {
        out.at(i, j) = cell_mean(p, x0, x1, y0, y1);
        continue;
      }
      // Weighted area as the flux of P(rho)/rho^2 (x, y) through the boundary of cell and D.
      const double xs[5] = {x0, x1, x1, x0, x0};
      const double ys[5] = {y0, y0, y1, y1, y0};
      const double centre = std::atan2(0.5 * (y0 + y1), 0.5 * (x0 + x1));
      std::vector<double> outer_angles, inner_angles;
      double total = 0.0;
      for (int e = 0; e < 4; ++e) {
        const double ax = xs[e], ay = ys[e], bx = xs[e + 1], by = ys[e + 1];
        std::vector<double> cuts{0.0}, own;
        crossings(outer, ax, ay, bx, by, own);
        for (double t : own) outer_angles.push_back(std::atan2(ay + t * (by - ay), ax + t * (bx - ax)));
        cuts.insert(cuts.end(), own.begin(), own.end());
        if (inner) {
          own.clear();
          crossings(*inner, ax, ay, bx, by, own);
          for (double t : own) inner_angles.push_back(std::atan2(ay + t * (by - ay), ax + t * (bx - ax)));
          cuts.insert(cuts.end(), own.begin(), own.end());
        }
        cuts.push_back(1.0);
        std::sort(cuts.begin(), cuts.end());
        const double cross = ax * by - ay * bx;
        for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
          const double mid = 0.5 * (cuts[c] + cuts[c + 1]);
          if (!in_domain(ax + mid * (bx - ax), ay + mid * (by - ay))) continue;
          total += gauss_integrate(
              [&](double t) {
                const double x = ax + t * (bx - ax), y = ay + t * (by - ay);
                return mass.over_square(std::hypot(x, y)) * cross;
              },
              cuts[c], cuts[c + 1], 8);
        }
      }
      const auto arcs = [&](const FourierContour& c, std::vector<double>& angles) {
        for (double& a : angles) a = centre + std::remainder(a - centre, 2.0 * kPi);
        std::sort(angles.begin(), angles.end());
        double sum = 0.0;
        for (std::size_t k = 0; k + 1 < angles.size(); ++k) {
          const double th = 0.5 * (angles[k] + angles[k + 1]);
          const double r = c.radius(th);
          const double x = r * std::cos(th), y = r * std::sin(th);
          if (x <= x0 || x >= x1 || y <= y0 || y >= y1) continue;
          sum += gauss_integrate([&](double s) { return mass(c.radius(s)); }, angles[k], angles[k + 1], 8);
        }
        return sum;
      };
      total += arcs(outer, outer_angles);
      if (inner) total -= arcs(*inner, inner_angles);
      out.at(i, j) = total / (h * h);
    }
  }
  return out;
}

Field2D fd_solve_2d(const DepthProfile& p, const Field2D& source, const PlaneFunction& boundary) {
  const Grid2D& grid = source.grid;
  const std::size_t n = grid.n;
  const std::size_t m = n - 2;
  const double h = grid.spacing();
  Field2D out(grid);
  for (std::size_t k = 0; k < n; ++k) {
    out.at(k, 0) = boundary(grid.coord(k), grid.coord(0));
    out.at(k, n - 1) = boundary(grid.coord(k), grid.coord(n - 1));
    out.at(0, k) = boundary(grid.coord(0), grid.coord(k));
    out.at(n - 1, k) = boundary(grid.coord(n - 1), grid.coord(k));
  }
  const auto index = [m](std::size_t i, std::size_t j) {
    return static_cast<Eigen::Index>((j - 1) * m + (i - 1));
  };
  const auto conductance = [&](double x, double y) { return 1.0 / p(std::hypot(x, y)); };
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(5 * m * m);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(m * m));
  for (std::size_t j = 1; j <= m; ++j) {
    for (std::size_t i = 1; i <= m; ++i) {
      const double x = grid.coord(i), y = grid.coord(j);
      const Eigen::Index row = index(i, j);
      double value = h * h * source.at(i, j);
      double diag = 0.0;
      const std::array<std::array<long, 2>, 4> dirs{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
      for (const auto& d : dirs) {
        const double c = conductance(x + 0.5 * h * d[0], y + 0.5 * h * d[1]);
        diag += c;
        const std::size_t ni = static_cast<std::size_t>(static_cast<long>(i) + d[0]);
        const std::size_t nj = static_cast<std::size_t>(static_cast<long>(j) + d[1]);
        if (ni == 0 || nj == 0 || ni == n - 1 || nj == n - 1)
          value += c * out.at(ni, nj);
        else
          triplets.emplace_back(row, index(ni, nj), -c);
      }
      triplets.emplace_back(row, row, diag);
      rhs[row] = value;
    }
  }
  Eigen::SparseMatrix<double> a(static_cast<Eigen::Index>(m * m), static_cast<Eigen::Index>(m * m));
  a.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(a);
  if (solver.info() != Eigen::Success) throw NumericalError("fd_solve_2d: factorisation failed");
  const Eigen::VectorXd u = solver.solve(rhs);
  if (solver.info() != Eigen::Success) throw NumericalError("fd_solve_2d: solve failed");
  const double residual = (a * u - rhs).norm() / std::max(rhs.norm(), 1e-300);
  if (!(residual <= 1e-10)) throw NumericalError("fd_solve_2d: linear residual above 1e-10");
  for (std::size_t j = 1; j <= m; ++j)
    for (std::size_t i = 1; i <= m; ++i) out.at(i, j) = u[index(i, j)];
  return out;
}

CompactSource unit_bump(double cx, double cy, double width) {
  if (!(width > 0.0)) throw ConfigError("unit_bump: width must be positive");
  const double scale = 4.0 / (kPi * width * width);
  CompactSource s;
  s.f = [=](double x, double y) {
    const double q = ((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (width * width);
    if (q >= 1.0) return 0.0;
    const double t = 1.0 - q;
    return scale * t * t * t;
  };
  s.support_radius = std::hypot(cx, cy) + width;
  return s;
}

ExteriorStream::ExteriorStream(const DepthProfile& p, const CompactSource& source, double max_radius, int l_max,
                               std::size_t angular_nodes)
    : profile_(p), support_(source.support_radius), l_max_(l_max) {
  if (!(support_ > 0.0)) throw ConfigError("ExteriorStream: support radius must be positive");
  if (l_max < 0) throw ConfigError("ExteriorStream: l_max must be non-negative");
  greens_ = std::make_unique<GreenCache>(profile_, RadialGrid::for_profile(profile_, std::max(max_radius, support_)));
  // Polar quadrature of the source: composite Gauss-Legendre in r, trapezoid in eta.
  constexpr std::size_t kPieces = 64, kOrder = 16;
  const GaussRule& g = gauss_legendre(kOrder);
  std::vector<double> rs, ws;
  for (std::size_t piece = 0; piece < kPieces; ++piece) {
    const double lo = support_ * static_cast<double>(piece) / kPieces;
    const double hi = support_ * static_cast<double>(piece + 1) / kPieces;
    for (std::size_t k = 0; k < kOrder; ++k) {
      rs.push_back(0.5 * (lo + hi) + 0.5 * (hi - lo) * g.nodes[k]);
      ws.push_back(0.5 * (hi - lo) * g.weights[k]);
    }
  }
  const auto L = static_cast<std::size_t>(l_max);
  cos_moment_.assign(L, 0.0);
  sin_moment_.assign(L, 0.0);
  std::vector<const ModeGreen*> modes(L);
  for (std::size_t l = 0; l < L; ++l) modes[l] = &greens_->get(static_cast<int>(l + 1));
  const double deta = 2.0 * kPi / static_cast<double>(angular_nodes);
  std::vector<double> gc(L), gs(L);
  for (std::size_t k = 0; k < rs.size(); ++k) {
    const double r = rs[k];
    double g0 = 0.0;
    std::fill(gc.begin(), gc.end(), 0.0);
    std::fill(gs.begin(), gs.end(), 0.0);
    for (std::size_t e = 0; e < angular_nodes; ++e) {
      const double eta = deta * static_cast<double>(e);
      const double w = source.f(r * std::cos(eta), r * std::sin(eta));
      if (w == 0.0) continue;
      g0 += w;
      for (std::size_t l = 0; l < L; ++l) {
        const double arg = static_cast<double>(l + 1) * eta;
        gc[l] += w * std::cos(arg);
        gs[l] += w * std::sin(arg);
      }
    }
    mass_ += ws[k] * r * g0 * deta;
    for (std::size_t l = 0; l < L; ++l) {
      const double weight = ws[k] * r * std::pow(r / support_, static_cast<double>(l + 1)) *
                            modes[l]->phi_minus(r).value * deta / kPi;
      cos_moment_[l] += weight * gc[l];
      sin_moment_[l] += weight * gs[l];
    }
  }
}

double ExteriorStream::operator()(double x, double y) const {
  const double rho = std::hypot(x, y);
  if (rho < support_) throw ConfigError("ExteriorStream: evaluation point inside the support disc");
  const double theta = std::atan2(y, x);
  double psi = normalized_radial(profile_, rho) * mass_ / (2.0 * kPi);
  for (int l = 1; l <= l_max_; ++l) {
    const ModeGreen& mg = greens_->get(l);
    const auto k = static_cast<std::size_t>(l - 1);
    const double radial = mg.phi_plus(rho).value * std::pow(support_ / rho, l) / mg.normalization();
    psi += radial * (cos_moment_[k] * std::cos(l * theta) + sin_moment_[k] * std::sin(l * theta));
  }
  return psi;
}

nlohmann::json CheckResult::to_json() const {
  return {{"check", check}, {"params", params}, {"value", value}, {"tolerance", tolerance}, {"pass", pass}};
}

ConvergenceStudy fd_convergence(const PatchEvaluator& ev, const FourierContour& domain,
                                const std::vector<std::size_t>& grids, double half_width, int l_max) {
  if (grids.empty()) throw ConfigError("fd_convergence: need at least one grid");
  const auto stream = [&](double x, double y) {
    const double rho = std::hypot(x, y);
    return ev.point(domain, rho, std::atan2(y, x), l_max).psi;
  };
  // Probe points: a coarse lattice common to every grid, kept away from the boundary band.
  const std::size_t coarse = *std::min_element(grids.begin(), grids.end());
  const std::size_t stride = std::max<std::size_t>(1, (coarse - 1) / 16);
  const double margin = 0.2 * domain.a();
  const Grid2D base(half_width, coarse);
  std::vector<std::array<double, 3>> probes;
  for (std::size_t j = 0; j < coarse; j += stride)
    for (std::size_t i = 0; i < coarse; i += stride) {
      if (i == 0 || j == 0 || i == coarse - 1 || j == coarse - 1) continue;
      const double x = base.coord(i), y = base.coord(j);
      const double rho = std::hypot(x, y);
      if (rho < 1e-12) continue;
      if (rho > domain.min_radius() - margin && rho < domain.max_radius() + margin) continue;
      probes.push_back({x, y, stream(x, y)});
    }
  ConvergenceStudy study;
  for (std::size_t n : grids) {
    if ((n - 1) % (coarse - 1) != 0) throw ConfigError("fd_convergence: grids must refine the coarsest grid");
    const Grid2D grid(half_width, n);
    const Field2D psi = fd_solve_2d(ev.profile(), patch_source(grid, ev.profile(), domain), stream);
    const double h = grid.spacing();
    double err = 0.0;
    for (const auto& pr : probes) {
      const auto i = static_cast<std::size_t>(std::lround((pr[0] + half_width) / h));
      const auto j = static_cast<std::size_t>(std::lround((pr[1] + half_width) / h));
      err = std::max(err, std::abs(psi.at(i, j) - pr[2]));
    }
    study.grids.push_back(n);
    study.errors.push_back(err);
  }
  for (std::size_t k = 0; k + 1 < study.errors.size(); ++k) {
    const double ratio = static_cast<double>(study.grids[k + 1] - 1) / static_cast<double>(study.grids[k] - 1);
    study.orders.push_back(std::log(study.errors[k] / study.errors[k + 1]) / std::log(ratio));
  }
  if (study.errors.size() >= 2) {
    std::vector<double> spacing;
    for (std::size_t n : study.grids) spacing.push_back(2.0 * half_width / static_cast<double>(n - 1));
    study.fitted_order = loglog_slope(spacing, study.errors);
  }
  return study;
}

double self_adjointness_check(const DepthProfile& p, const CompactSource& w1, const CompactSource& w2,
                              const Grid2D& grid, int l_max) {
  const double support = std::max(w1.support_radius, w2.support_radius);
  if (2.0 * support > grid.half_width) throw ConfigError("self_adjointness_check: box too small for the sources");
  const double corner = grid.half_width * std::sqrt(2.0);
  const ExteriorStream e1(p, w1, corner, l_max), e2(p, w2, corner, l_max);
  for (double mass : {e1.mass(), e2.mass()})
    if (std::abs(mass - 1.0) > 1e-8) throw ConfigError("self_adjointness_check: sources must have unit mass");
  const Field2D s1 = sample_field(grid, w1.f), s2 = sample_field(grid, w2.f);
  const Field2D g1 = fd_solve_2d(p, s1, [&](double x, double y) { return e1(x, y); });
  const Field2D g2 = fd_solve_2d(p, s2, [&](double x, double y) { return e2(x, y); });
  return std::abs(g1.pairing(s2) - s1.pairing(g2));
}

double decomposition_check(const DepthProfile& p, const std::function<double(double)>& f, double support,
                           const std::vector<double>& radii) {
  if (radii.empty()) throw ConfigError("decomposition_check: need at least one radius");
  if (!(support > 0.0)) throw ConfigError("decomposition_check: support must be positive");
  const double top = *std::max_element(radii.begin(), radii.end());
  const RadialGrid grid = RadialGrid::for_profile(p, std::max(top, support), 4096);
  const std::vector<double> cuts{support, p.r_inf()};
  constexpr double kTol = 1e-14;

  const RadialFunction full = solve_mode_zero(p, RadialSource{f, cuts}, grid);

  // Mass function m(r) = int_0^r tau b f dtau of the Newtonian potential, by 24-point Gauss
  // rules on the smooth pieces.
  const auto mass = [&](double r) {
    const auto integrand = [&](double t) { return t * p(t) * f(t); };
    const double end = std::min(r, support);
    double total = 0.0, lo = 0.0;
    for (double c : cuts) {
      if (c <= lo || c >= end) continue;
      total += gauss_integrate(integrand, lo, c, 24);
      lo = c;
    }
    return total + gauss_integrate(integrand, lo, end, 24);
  };
  const auto remainder_source = [&](double r) {
    if (r >= p.r_inf() || r <= 0.0) return 0.0;
    const double b = p(r);
    return p.derivative(r) * mass(r) / (r * b * b);
  };
  const RadialFunction remainder = solve_mode_zero(p, RadialSource{remainder_source, cuts}, grid);

  const double ref = radii.front();
  double worst = 0.0;
  for (double r : radii) {
    const double newton = -adaptive_integrate([&](double s) { return mass(s) / s; }, ref, r, kTol, cuts);
    const double lhs = full(r) - full(ref);
    const double rhs = newton + remainder(r) - remainder(ref);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

double log_identity_quadrature(int n, double x, double y, double theta, std::size_t nodes) {
  if (n < 1 || nodes < 1) throw ConfigError("log_identity: need n >= 1 and nodes >= 1");
  if (!(x > 0.0) || !(y > 0.0)) throw ConfigError("log_identity: radii must be positive");
  const double step = 2.0 * kPi / static_cast<double>(nodes);
  double total = 0.0;
  for (std::size_t j = 0; j < nodes; ++j) {
    const double eta = theta + (static_cast<double>(j) + 0.5) * step;
    const double d2 = x * x + y * y - 2.0 * x * y * std::cos(eta - theta);
    total += 0.5 * std::log(d2) * std::cos(n * eta);
  }
  return total / static_cast<double>(nodes);
}

double log_identity_closed_form(int n, double x, double y, double theta) {
  const double ratio = std::min(x / y, y / x);
  return -std::cos(n * theta) * std::pow(ratio, n) / (2.0 * n);
}

double log_identity_error(int n, double x, double y, double theta, std::size_t nodes) {
  return std::abs(log_identity_quadrature(n, x, y, theta, nodes) - log_identity_closed_form(n, x, y, theta));
}

std::size_t log_identity_nodes(int n, double x, double y, double theta, double tol, std::size_t n_max) {
  if (!(tol > 0.0)) throw ConfigError("log_identity: tolerance must be positive");
  std::size_t nodes = 8;
  double current = log_identity_quadrature(n, x, y, theta, nodes);
  while (nodes < n_max) {
    const double next = log_identity_quadrature(n, x, y, theta, 2 * nodes);
    if (std::abs(next - current) < tol) return nodes;
    nodes *= 2;
    current = next;
  }
  return n_max;
}

RigidRotationResult rigid_rotation_check(const PatchEvaluator& ev, const BranchStep& state, double T,
                                         double dt, int l_max, std::size_t markers) {
  if (!(T >= 0.0) || !(dt > 0.0)) throw ConfigError("rigid_rotation_check: need T >= 0 and dt > 0");
  const int m = state.outer.m();
  if (markers == 0) markers = 16 * static_cast<std::size_t>(m);
  const DepthProfile& p = ev.profile();
  // Velocity of the patch rotated by angle shift: the field is the time-0 field with theta shifted.
  const auto velocity = [&](const Eigen::Vector2d& x, double shift) -> Eigen::Vector2d {
    const double rho = x.norm();
    const double theta = std::atan2(x[1], x[0]);
    StreamPoint s = ev.point(state.outer, rho, theta - shift, l_max);
    if (state.inner) {
      const StreamPoint hole = ev.point(*state.inner, rho, theta - shift, l_max);
      s.d_rho -= hole.d_rho;
      s.d_theta -= hole.d_theta;
    }
    const double c = std::cos(theta), sn = std::sin(theta);
    const double dx = c * s.d_rho - sn * s.d_theta / rho;
    const double dy = sn * s.d_rho + c * s.d_theta / rho;
    return Eigen::Vector2d(dy, -dx) / p(rho);
  };
  std::vector<const FourierContour*> curves{&state.outer};
  if (state.inner) curves.push_back(&*state.inner);
  const auto steps = static_cast<std::size_t>(std::ceil(T / dt - 1e-12));
  const double h = steps == 0 ? 0.0 : T / static_cast<double>(steps);
  RigidRotationResult result;
  result.steps = steps;
  for (const FourierContour* curve : curves) {
    for (std::size_t k = 0; k < markers; ++k) {
      const double theta0 = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(markers);
      Eigen::Vector2d x = curve->radius(theta0) * Eigen::Vector2d(std::cos(theta0), std::sin(theta0));
      for (std::size_t s = 0; s < steps; ++s) {
        const double t0 = h * static_cast<double>(s);
        const double w = state.omega;
        const Eigen::Vector2d k1 = velocity(x, w * t0);
        const Eigen::Vector2d k2 = velocity(x + 0.5 * h * k1, w * (t0 + 0.5 * h));
        const Eigen::Vector2d k3 = velocity(x + 0.5 * h * k2, w * (t0 + 0.5 * h));
        const Eigen::Vector2d k4 = velocity(x + h * k3, w * (t0 + h));
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
      const double phi = std::atan2(x[1], x[0]);
      result.deviation = std::max(result.deviation, std::abs(x.norm() - curve->radius(phi - state.omega * T)));
      ++result.markers;
    }
  }
  return result;
}

const std::vector<std::string>& suite_checks() {
  static const std::vector<std::string> names{"fd", "self-adjoint", "decomposition", "log-identity",
                                              "rigid-rotation"};
  return names;
}

std::vector<CheckResult> run_verify_suite(const DepthProfile& p, const SuiteOptions& options) {
  const auto& names = suite_checks();
  if (options.selector != "all" && std::find(names.begin(), names.end(), options.selector) == names.end())
    throw ConfigError("verify: unknown suite '" + options.selector + "'");
  if (!(options.quad_tol > 0.0)) throw ConfigError("verify: quad_tol must be positive");
  const auto selected = [&](const std::string& name) { return options.selector == "all" || options.selector == name; };
  std::vector<CheckResult> out;

  if (selected("fd")) {
    constexpr double kHalfWidth = 4.0;
    const PatchEvaluator ev(p, kHalfWidth * std::sqrt(2.0) + 0.1);
    const FourierContour patch(1.0, 3, {0.05, 0.01});
    const ConvergenceStudy study = fd_convergence(ev, patch, {129, 257, 513}, kHalfWidth, 96);
    CheckResult r;
    r.check = "fd";
    r.params = {{"grids", study.grids}, {"errors", study.errors}, {"pairwise_orders", study.orders},
                {"half_width", kHalfWidth}, {"patch", patch.to_json()}};
    r.value = study.fitted_order;
    r.tolerance = 0.2;
    r.pass = std::abs(study.fitted_order - 2.0) <= r.tolerance;
    out.push_back(std::move(r));
  }

  if (selected("self-adjoint")) {
    const CompactSource w1 = unit_bump(0.6, 0.2, 0.8), w2 = unit_bump(-0.5, -0.4, 0.9);
    const std::vector<std::size_t> grids{65, 129, 257};
    std::vector<double> spacing, discrepancy;
    for (std::size_t n : grids) {
      const Grid2D grid(4.0, n);
      spacing.push_back(grid.spacing());
      discrepancy.push_back(self_adjointness_check(p, w1, w2, grid));
    }
    const double order = loglog_slope(spacing, discrepancy);
    CheckResult r;
    r.check = "self-adjoint";
    r.params = {{"grids", grids}, {"discrepancies", discrepancy}, {"fitted_order", order}, {"min_order", 1.8}};
    r.value = discrepancy.back();
    r.tolerance = 1e-5;
    r.pass = r.value <= r.tolerance && order >= 1.8;
    out.push_back(std::move(r));
  }

  if (selected("decomposition")) {
    const std::vector<double> radii{2.5, 0.2, 0.5, 0.8, 1.2, 1.7, 2.2, 3.0};
    const double err = decomposition_check(p, [](double r) { return r < 1.0 ? 1.0 : 0.0; }, 1.0, radii);
    CheckResult r;
    r.check = "decomposition";
    r.params = {{"source", "indicator of r < 1"}, {"radii", radii}};
    r.value = err;
    r.tolerance = 1e-8;
    r.pass = err <= r.tolerance;
    out.push_back(std::move(r));
  }

  if (selected("log-identity")) {
    double worst = 0.0;
    std::size_t most = 0;
    for (int n : {1, 2, 3, 5, 8, 12, 16})
      for (double x : {0.1, 0.5, 0.9})
        for (double theta : {0.0, 0.7}) {
          const std::size_t nodes = std::min<std::size_t>(log_identity_nodes(n, x, 1.0, theta, options.quad_tol), 4096);
          most = std::max(most, nodes);
          worst = std::max(worst, log_identity_error(n, x, 1.0, theta, nodes));
        }
    CheckResult r;
    r.check = "log-identity";
    r.params = {{"quad_tol", options.quad_tol}, {"max_nodes", most}, {"n_max", 16}, {"ratios", {0.1, 0.5, 0.9}}};
    r.value = worst;
    r.tolerance = 1e-8;
    r.pass = worst <= r.tolerance;
    out.push_back(std::move(r));
  }

  if (selected("rigid-rotation")) {
    constexpr double a = 1.0;
    const PatchEvaluator ev(p, 3.0 * a);
    BranchOptions bo;
    bo.s_max = 0.05 * a * a;
    bo.ds = 0.025 * a * a;
    bo.K = 16;
    bo.newton_tol = options.newton_tol;
    bo.jobs = options.jobs;
    const VStateBranch branch = continue_simply(ev, a, 3, bo);
    CheckResult r;
    r.check = "rigid-rotation";
    r.tolerance = 1e-5 * a;
    if (branch.truncated || branch.steps.empty()) {
      r.params = {{"diagnostic", branch.diagnostic}};
      r.value = std::numeric_limits<double>::infinity();
    } else {
      const BranchStep& state = branch.steps.back();
      const double quarter = 0.5 * kPi / state.omega;
      const RigidRotationResult rr = rigid_rotation_check(ev, state, quarter, 0.1, 96);
      r.params = {{"m", 3}, {"a", a}, {"s", state.s}, {"omega", state.omega}, {"T", quarter}, {"dt", 0.1},
                  {"l_max", 96}, {"markers", rr.markers}, {"residual", state.residual_fine}};
      r.value = rr.deviation;
    }
    r.pass = r.value <= r.tolerance;
    out.push_back(std::move(r));
  }
  return out;
}

nlohmann::json suite_report(const std::vector<CheckResult>& results) {
  nlohmann::json checks = nlohmann::json::array(), failed = nlohmann::json::array();
  for (const CheckResult& r : results) {
    checks.push_back(r.to_json());
    if (!r.pass) failed.push_back(r.check);
  }
  return {{"checks", checks}, {"pass", failed.empty()}, {"failed", failed}};
}

}  // namespace lakevort
