#include "lakevort/branch.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "lakevort/error.hpp"
#include "lakevort/functional.hpp"
#include "lakevort/parallel.hpp"

namespace lakevort {

namespace {

using Residual = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct NewtonResult {
  Eigen::VectorXd x;
  Eigen::VectorXd residual;
  int iterations = 0;
};

double inf_norm(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

NewtonResult newton(const Residual& f, Eigen::VectorXd x, double step, const BranchOptions& o) {
  NewtonResult out;
  Eigen::VectorXd r = f(x);
  const auto n = x.size();
  for (int it = 0;; ++it) {
    if (inf_norm(r) <= o.newton_tol) {
      out.x = std::move(x);
      out.residual = std::move(r);
      out.iterations = it;
      return out;
    }
    if (it == o.max_iterations) {
      std::ostringstream msg;
      msg << "Newton did not converge in " << o.max_iterations << " iterations (residual " << inf_norm(r) << ")";
      throw NumericalError(msg.str());
    }
    Eigen::MatrixXd jac(r.size(), n);
    parallel_for(static_cast<std::size_t>(n), o.jobs, [&](std::size_t j) {
      Eigen::VectorXd xj = x;
      xj[static_cast<Eigen::Index>(j)] += step;
      jac.col(static_cast<Eigen::Index>(j)) = (f(xj) - r) / step;
    });
    const Eigen::VectorXd dx = jac.partialPivLu().solve(-r);
    if (!dx.allFinite()) throw NumericalError("Newton: singular Jacobian");
    double lambda = 1.0;
    bool accepted = false;
    std::string last_error;
    for (int h = 0; h <= o.max_halvings && !accepted; ++h, lambda *= 0.5) {
      const Eigen::VectorXd trial = x + lambda * dx;
      try {
        Eigen::VectorXd rt = f(trial);
        if (inf_norm(rt) < inf_norm(r)) {
          x = trial;
          r = std::move(rt);
          accepted = true;
        }
      } catch (const Error& e) {
        last_error = e.what();
      }
    }
    if (!accepted) {
      std::ostringstream msg;
      msg << "Newton line search failed after " << o.max_halvings << " halvings (residual " << inf_norm(r) << ")";
      if (!last_error.empty()) msg << ": " << last_error;
      throw NumericalError(msg.str());
    }
  }
}

std::size_t node_multiplier(const PatchEvaluator& ev, int m, int K) {
  const std::size_t base = ev.theta_nodes(m, 1);
  const std::size_t needed = 4 * static_cast<std::size_t>(m) * static_cast<std::size_t>(K + 1);
  return std::max<std::size_t>(1, (needed + base - 1) / base);
}

void check_options(const BranchOptions& o) {
  if (!(o.ds > 0.0)) throw ConfigError("branch: ds must be positive");
  if (!(o.s_max >= 0.0)) throw ConfigError("branch: s_max must be non-negative");
  if (o.K < 2) throw ConfigError("branch: K must be at least 2");
  if (!(o.newton_tol > 0.0)) throw ConfigError("branch: newton_tol must be positive");
  if (o.max_iterations < 1) throw ConfigError("branch: max_iterations must be positive");
  if (o.check_multiplier < 1) throw ConfigError("branch: check_multiplier must be positive");
}

int step_count(const BranchOptions& o) { return static_cast<int>(std::floor(o.s_max / o.ds + 1e-9)); }

Eigen::VectorXd extrapolate(const std::vector<Eigen::VectorXd>& history, const std::vector<double>& s,
                            double target) {
  const std::size_t n = history.size();
  if (n == 1) return history[0];
  if (n == 2) {
    const double t = (target - s[0]) / (s[1] - s[0]);
    return history[0] + t * (history[1] - history[0]);
  }
  const double x0 = s[n - 3], x1 = s[n - 2], x2 = s[n - 1];
  const double l0 = (target - x1) * (target - x2) / ((x0 - x1) * (x0 - x2));
  const double l1 = (target - x0) * (target - x2) / ((x1 - x0) * (x1 - x2));
  const double l2 = (target - x0) * (target - x1) / ((x2 - x0) * (x2 - x1));
  return l0 * history[n - 3] + l1 * history[n - 2] + l2 * history[n - 1];
}

bool tail_small(const std::vector<double>& c, double ref, double ratio) {
  return std::abs(c.back()) <= ratio * ref;
}

Eigen::Vector2d unit_perp(const Eigen::Vector2d& k) { return {-k[1], k[0]}; }

/// Omega(0) from a polynomial in s^2 through the first (up to three) nontrivial steps.
double extrapolate_even(const std::vector<BranchStep>& steps, double fallback) {
  const std::size_t n = std::min<std::size_t>(steps.size() - 1, 3);
  if (n == 0) return fallback;
  double total = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    double w = 1.0;
    const double xi = steps[i].s * steps[i].s;
    for (std::size_t j = 1; j <= n; ++j)
      if (j != i) {
        const double xj = steps[j].s * steps[j].s;
        w *= xj / (xj - xi);
      }
    total += w * steps[i].omega;
  }
  return total;
}

}  // namespace

std::string to_string(BranchLabel label) {
  switch (label) {
    case BranchLabel::simply:
      return "simply";
    case BranchLabel::doubly_plus:
      return "doubly-plus";
    case BranchLabel::doubly_minus:
      return "doubly-minus";
  }
  return "unknown";
}

nlohmann::json BranchStep::to_json() const {
  nlohmann::json j{{"s", s},
                   {"omega", omega},
                   {"outer", outer.to_json()},
                   {"residual_inf", residual_inf},
                   {"residual_fine", residual_fine},
                   {"iterations", iterations},
                   {"tail_ok", tail_ok}};
  if (inner) j["inner"] = inner->to_json();
  return j;
}

nlohmann::json VStateBranch::to_json() const {
  nlohmann::json steps_json = nlohmann::json::array();
  for (const auto& st : steps) steps_json.push_back(st.to_json());
  nlohmann::json j{{"m", m},
                   {"branch", to_string(label)},
                   {"omega_bifurcation", omega_bifurcation},
                   {"omega_extrapolated", omega_extrapolated},
                   {"options",
                    {{"s_max", options.s_max},
                     {"ds", options.ds},
                     {"K", options.K},
                     {"newton_tol", options.newton_tol},
                     {"max_iterations", options.max_iterations},
                     {"check_multiplier", options.check_multiplier}}},
                   {"truncated", truncated},
                   {"diagnostic", diagnostic},
                   {"steps", steps_json}};
  if (label != BranchLabel::simply) j["kernel"] = {kernel[0], kernel[1]};
  return j;
}

double residual_report(const PatchEvaluator& ev, const BranchStep& step, std::size_t multiplier) {
  const int m = step.outer.m();
  const int K = static_cast<int>(std::max<std::size_t>(step.outer.size(), 1));
  const std::size_t mult = node_multiplier(ev, m, K) * std::max<std::size_t>(multiplier, 1);
  if (!step.inner) return functional_F(ev, step.omega, step.outer, 1, mult).sup_norm;
  const FunctionalPair g = functional_G(ev, step.omega, step.outer, *step.inner, 1, mult);
  return std::max(g.outer.sup_norm, g.inner.sup_norm);
}

BranchStep solve_simply(const PatchEvaluator& ev, double a, int m, double s, double omega,
                        std::vector<double> coeffs, const BranchOptions& o) {
  check_options(o);
  const int K = o.K;
  coeffs.resize(static_cast<std::size_t>(K), 0.0);
  const std::size_t mult = node_multiplier(ev, m, K);
  auto contour_of = [&](const Eigen::VectorXd& x) {
    std::vector<double> c(static_cast<std::size_t>(K));
    c[0] = s;
    for (int k = 1; k < K; ++k) c[static_cast<std::size_t>(k)] = x[k];
    FourierContour contour(a, m, std::move(c));
    contour.validate();
    return contour;
  };
  const Residual f = [&](const Eigen::VectorXd& x) {
    const FourierContour contour = contour_of(x);
    const FunctionalValues v = functional_F(ev, x[0], contour, static_cast<std::size_t>(K), mult);
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.sine.data(), K));
  };
  Eigen::VectorXd x(K);
  x[0] = omega;
  for (int k = 1; k < K; ++k) x[k] = coeffs[static_cast<std::size_t>(k)];
  const double step = 1e-7 * std::max(a * a, std::abs(omega));
  const NewtonResult res = newton(f, x, step, o);
  BranchStep out;
  out.s = s;
  out.omega = res.x[0];
  out.outer = contour_of(res.x);
  out.residual_inf = inf_norm(res.residual);
  out.iterations = res.iterations;
  out.residual_fine = residual_report(ev, out, o.check_multiplier);
  out.tail_ok = s == 0.0 || tail_small(out.outer.coeffs(), std::abs(s), o.tail_ratio);
  return out;
}

VStateBranch continue_simply(const PatchEvaluator& ev, double a, int m, const BranchOptions& o) {
  check_options(o);
  if (!(a > 0.0)) throw ConfigError("continue_simply: a must be positive");
  if (m < 1) throw ConfigError("continue_simply: m must be >= 1");
  VStateBranch branch;
  branch.m = m;
  branch.label = BranchLabel::simply;
  branch.options = o;
  branch.omega_bifurcation = q_factor(ev.profile(), a, 0.0) - ev.greens().get(m).green(a, a);
  branch.omega_extrapolated = branch.omega_bifurcation;

  BranchStep trivial;
  trivial.omega = branch.omega_bifurcation;
  trivial.outer = FourierContour(a, m, std::vector<double>(static_cast<std::size_t>(o.K), 0.0));
  trivial.residual_fine = residual_report(ev, trivial, o.check_multiplier);
  trivial.residual_inf = trivial.residual_fine;
  branch.steps.push_back(trivial);

  std::vector<Eigen::VectorXd> history;
  std::vector<double> svals;
  auto state = [&](const BranchStep& st) {
    Eigen::VectorXd v(o.K);
    v[0] = st.omega;
    for (int k = 1; k < o.K; ++k) v[k] = st.outer.coeffs()[static_cast<std::size_t>(k)];
    return v;
  };
  history.push_back(state(trivial));
  svals.push_back(0.0);

  const int count = step_count(o);
  for (int i = 1; i <= count; ++i) {
    const double s = i * o.ds;
    const Eigen::VectorXd guess = extrapolate(history, svals, s);
    std::vector<double> coeffs(static_cast<std::size_t>(o.K), 0.0);
    for (int k = 1; k < o.K; ++k) coeffs[static_cast<std::size_t>(k)] = guess[k];
    try {
      BranchStep st = solve_simply(ev, a, m, s, guess[0], coeffs, o);
      history.push_back(state(st));
      svals.push_back(s);
      branch.steps.push_back(std::move(st));
    } catch (const Error& e) {
      std::ostringstream msg;
      msg << "truncated at s = " << s << ": " << e.what();
      branch.truncated = true;
      branch.diagnostic = msg.str();
      break;
    }
  }
  branch.omega_extrapolated = extrapolate_even(branch.steps, branch.omega_bifurcation);
  return branch;
}

VStateBranch continue_doubly(const PatchEvaluator& ev, double a1, double a2, int m, Branch sign,
                             const BranchOptions& o) {
  check_options(o);
  if (!(a2 > 0.0) || !(a1 > a2)) throw ConfigError("continue_doubly: need 0 < a2 < a1");
  if (m < 1) throw ConfigError("continue_doubly: m must be >= 1");
  SpectralOptions so;
  so.n_r = ev.options().n_r;
  const SpectralContext ctx(ev.profile(), {a1, a2}, so);
  const DoublySpectrum spectrum = omega_doubly(ctx, a1, a2, m);
  const Eigen::Vector2d kernel = kernel_generator(ctx, a1, a2, m, sign).normalized();
  const Eigen::Vector2d perp = unit_perp(kernel);

  VStateBranch branch;
  branch.m = m;
  branch.label = sign == Branch::plus ? BranchLabel::doubly_plus : BranchLabel::doubly_minus;
  branch.options = o;
  branch.kernel = kernel;
  branch.omega_bifurcation = sign == Branch::plus ? spectrum.omega_plus : spectrum.omega_minus;
  branch.omega_extrapolated = branch.omega_bifurcation;

  const int K = o.K;
  const auto Ku = static_cast<std::size_t>(K);
  const std::size_t mult = node_multiplier(ev, m, K);

  // Unknowns: Omega, t, outer r_2..r_K, inner r_2..r_K with (r_{1,1}, r_{2,1}) = s k + t k_perp.
  auto contours_of = [&](const Eigen::VectorXd& x, double s) {
    std::vector<double> c1(Ku), c2(Ku);
    const Eigen::Vector2d first = s * kernel + x[1] * perp;
    c1[0] = first[0];
    c2[0] = first[1];
    for (int k = 1; k < K; ++k) {
      c1[static_cast<std::size_t>(k)] = x[1 + k];
      c2[static_cast<std::size_t>(k)] = x[K + k];
    }
    FourierContour outer(a1, m, std::move(c1)), inner(a2, m, std::move(c2));
    outer.validate();
    inner.validate();
    if (!nested(outer, inner)) throw GeometryError("inner contour left the outer one");
    return std::pair{outer, inner};
  };
  auto state = [&](const BranchStep& st) {
    Eigen::VectorXd v(2 * K);
    v[0] = st.omega;
    const Eigen::Vector2d first(st.outer.coeffs()[0], st.inner->coeffs()[0]);
    v[1] = first.dot(perp);
    for (int k = 1; k < K; ++k) {
      v[1 + k] = st.outer.coeffs()[static_cast<std::size_t>(k)];
      v[K + k] = st.inner->coeffs()[static_cast<std::size_t>(k)];
    }
    return v;
  };

  BranchStep trivial;
  trivial.omega = branch.omega_bifurcation;
  trivial.outer = FourierContour(a1, m, std::vector<double>(Ku, 0.0));
  trivial.inner = FourierContour(a2, m, std::vector<double>(Ku, 0.0));
  trivial.residual_fine = residual_report(ev, trivial, o.check_multiplier);
  trivial.residual_inf = trivial.residual_fine;
  branch.steps.push_back(trivial);

  std::vector<Eigen::VectorXd> history{state(trivial)};
  std::vector<double> svals{0.0};
  const double fd_step = 1e-7 * std::max(a1 * a1, std::abs(branch.omega_bifurcation));

  const int count = step_count(o);
  for (int i = 1; i <= count; ++i) {
    const double s = i * o.ds;
    try {
      const Residual f = [&](const Eigen::VectorXd& x) {
        const auto [outer, inner] = contours_of(x, s);
        const FunctionalPair g = functional_G(ev, x[0], outer, inner, Ku, mult);
        Eigen::VectorXd r(2 * K);
        for (int k = 0; k < K; ++k) {
          r[k] = g.outer.sine[static_cast<std::size_t>(k)];
          r[K + k] = g.inner.sine[static_cast<std::size_t>(k)];
        }
        return r;
      };
      const NewtonResult res = newton(f, extrapolate(history, svals, s), fd_step, o);
      auto [outer, inner] = contours_of(res.x, s);
      BranchStep st;
      st.s = s;
      st.omega = res.x[0];
      st.outer = std::move(outer);
      st.inner = std::move(inner);
      st.residual_inf = inf_norm(res.residual);
      st.iterations = res.iterations;
      st.residual_fine = residual_report(ev, st, o.check_multiplier);
      const double ref = std::max(std::abs(st.outer.coeffs()[0]), std::abs(st.inner->coeffs()[0]));
      st.tail_ok = tail_small(st.outer.coeffs(), ref, o.tail_ratio) && tail_small(st.inner->coeffs(), ref, o.tail_ratio);
      history.push_back(res.x);
      svals.push_back(s);
      branch.steps.push_back(std::move(st));
    } catch (const Error& e) {
      std::ostringstream msg;
      msg << "truncated at s = " << s << ": " << e.what();
      branch.truncated = true;
      branch.diagnostic = msg.str();
      break;
    }
  }
  branch.omega_extrapolated = extrapolate_even(branch.steps, branch.omega_bifurcation);
  return branch;
}

}  // namespace lakevort
