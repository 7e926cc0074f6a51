#include "lakevort/functional.hpp"

#include <algorithm>
#include <cmath>

#include "lakevort/error.hpp"

namespace lakevort {

namespace {

void project(FunctionalValues& f, int m, std::size_t projections) {
  const std::size_t n = f.values.size();
  const std::size_t resolvable = n / (2 * static_cast<std::size_t>(m)) - 1;
  const std::size_t count = projections == 0 ? resolvable : std::min(projections, resolvable);
  f.sine.assign(count, 0.0);
  f.cosine.assign(count + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = f.values[i];
    f.sup_norm = std::max(f.sup_norm, std::abs(v));
    f.cosine[0] += v;
    for (std::size_t k = 1; k <= count; ++k) {
      const double x = static_cast<double>(k) * m * f.theta[i];
      f.sine[k - 1] += v * std::sin(x);
      f.cosine[k] += v * std::cos(x);
    }
  }
  const double scale = 2.0 / static_cast<double>(n);
  f.cosine[0] /= static_cast<double>(n);
  for (double& v : f.sine) v *= scale;
  for (std::size_t k = 1; k <= count; ++k) f.cosine[k] *= scale;
}

FunctionalValues assemble(const PatchEvaluator& ev, double omega, const FourierContour& contour,
                          const BoundaryTrace& trace, const BoundaryTrace* minus) {
  FunctionalValues f;
  f.theta = trace.theta;
  f.values.resize(trace.theta.size());
  for (std::size_t i = 0; i < f.theta.size(); ++i) {
    const double t = f.theta[i];
    const double dr = contour.r_derivatives(t)[1];
    double d = trace.dtheta[i];
    if (minus) d -= minus->dtheta[i];
    f.values[i] = omega * dr + d / ev.profile()(contour.radius(t));
  }
  return f;
}

}  // namespace

FunctionalValues functional_F(const PatchEvaluator& ev, double omega, const FourierContour& contour,
                              std::size_t projections, std::size_t multiplier) {
  const std::size_t nodes = ev.theta_nodes(contour.m(), multiplier);
  const BoundaryTrace trace = ev.trace(contour, contour, false, nodes);
  FunctionalValues f = assemble(ev, omega, contour, trace, nullptr);
  project(f, contour.m(), projections);
  return f;
}

FunctionalPair functional_G(const PatchEvaluator& ev, double omega, const FourierContour& outer,
                            const FourierContour& inner, std::size_t projections, std::size_t multiplier) {
  if (outer.m() != inner.m()) throw ConfigError("functional_G: contours must share m");
  outer.validate();
  inner.validate();
  if (!nested(outer, inner)) throw GeometryError("functional_G: inner contour is not nested inside outer");
  const std::size_t nodes = ev.theta_nodes(outer.m(), multiplier);
  FunctionalPair out;
  {
    const BoundaryTrace own = ev.trace(outer, outer, false, nodes);
    const BoundaryTrace hole = ev.trace(inner, outer, false, nodes);
    out.outer = assemble(ev, omega, outer, own, &hole);
  }
  {
    const BoundaryTrace disc = ev.trace(outer, inner, false, nodes);
    const BoundaryTrace own = ev.trace(inner, inner, false, nodes);
    out.inner = assemble(ev, omega, inner, disc, &own);
  }
  project(out.outer, outer.m(), projections);
  project(out.inner, inner.m(), projections);
  return out;
}

std::vector<MultiplierRow> multiplier_check(const PatchEvaluator& ev, double a, double omega, int m,
                                            int n_max, double eps) {
  if (!(eps > 0.0)) throw ConfigError("multiplier_check: eps must be positive");
  const DepthProfile& p = ev.profile();
  const double q = q_factor(p, a, 0.0);
  std::vector<MultiplierRow> rows;
  for (int n = 1; n <= n_max; ++n) {
    std::vector<double> coeffs(static_cast<std::size_t>(n), 0.0);
    coeffs.back() = eps;
    const FunctionalValues plus = functional_F(ev, omega, FourierContour(a, m, coeffs), static_cast<std::size_t>(n));
    coeffs.back() = -eps;
    const FunctionalValues minus = functional_F(ev, omega, FourierContour(a, m, coeffs), static_cast<std::size_t>(n));
    MultiplierRow row;
    row.n = n;
    const auto k = static_cast<std::size_t>(n - 1);
    row.fd = (plus.sine[k] - minus.sine[k]) / (2.0 * eps);
    const int nm = n * m;
    row.analytic = -nm * (omega - q + ev.greens().get(nm).green(a, a));
    row.abs_error = std::abs(row.fd - row.analytic);
    row.rel_error = row.abs_error / std::max(std::abs(row.analytic), 1e-300);
    rows.push_back(row);
  }
  return rows;
}

std::vector<MatrixMultiplierRow> multiplier_check_doubly(const PatchEvaluator& ev, double a1, double a2,
                                                         double omega, int m, int n_max, double eps) {
  if (!(eps > 0.0)) throw ConfigError("multiplier_check: eps must be positive");
  if (!(a2 > 0.0) || !(a1 > a2)) throw ConfigError("multiplier_check: need 0 < a2 < a1");
  const DepthProfile& p = ev.profile();
  const double q = q_factor(p, a1, a2);
  const double b1 = p(a1), b2 = p(a2);
  std::vector<MatrixMultiplierRow> rows;
  for (int n = 1; n <= n_max; ++n) {
    MatrixMultiplierRow row;
    row.n = n;
    const auto k = static_cast<std::size_t>(n - 1);
    for (int column = 0; column < 2; ++column) {
      std::vector<double> pert(static_cast<std::size_t>(n), 0.0);
      double proj[2][2];
      for (int side = 0; side < 2; ++side) {
        pert.back() = side == 0 ? eps : -eps;
        const FourierContour outer(a1, m, column == 0 ? pert : std::vector<double>{});
        const FourierContour inner(a2, m, column == 1 ? pert : std::vector<double>{});
        const FunctionalPair g = functional_G(ev, omega, outer, inner, static_cast<std::size_t>(n));
        proj[side][0] = g.outer.sine[k];
        proj[side][1] = g.inner.sine[k];
      }
      row.fd(0, column) = (proj[0][0] - proj[1][0]) / (2.0 * eps);
      row.fd(1, column) = (proj[0][1] - proj[1][1]) / (2.0 * eps);
    }
    const int nm = n * m;
    const ModeGreen& mg = ev.greens().get(nm);
    const double l11 = mg.green(a1, a1), l22 = mg.green(a2, a2), l12 = mg.green(a1, a2);
    Eigen::Matrix2d mat;
    mat << omega - q + l11, -(b2 / b1) * l12, (b1 / b2) * l12, omega - l22;
    row.analytic = -nm * mat;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        row.rel_error = std::max(row.rel_error, std::abs(row.fd(i, j) - row.analytic(i, j)) /
                                                    std::max(std::abs(row.analytic(i, j)), 1e-300));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace lakevort
