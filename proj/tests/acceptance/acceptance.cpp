#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "lakevort/branch.hpp"
#include "lakevort/error.hpp"
#include "lakevort/functional.hpp"
#include "lakevort/spectral.hpp"
#include "lakevort/verify.hpp"

using namespace lakevort;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

const DepthProfile& flat() {
  static const DepthProfile p = DepthProfile::constant(1.0);
  return p;
}

const DepthProfile& bump() {
  static const DepthProfile p = make_bump_profile(1.0, 0.5, 2.0);
  return p;
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

Outcome euler_limit() {
  double worst = 0.0;
  for (double a : {0.5, 1.0, 2.0}) {
    const SpectralContext ctx(flat(), {a});
    for (int m = 1; m <= 8; ++m) worst = std::max(worst, std::abs(omega_simply(ctx, a, m) - (m - 1.0) / (2.0 * m)));
  }
  return {worst <= 1e-8, fmt("max |Omega_m - (m-1)/(2m)| = %.3e", worst)};
}

Outcome constant_closed_form() {
  const std::vector<double> radii{0.4, 0.6, 1.0, 1.4};
  const SpectralContext ctx(flat(), radii);
  double worst = 0.0;
  for (int n = 1; n <= 32; ++n)
    for (double a : radii)
      for (double b : radii) {
        const double expect = std::pow(min_ratio(a, b), n) / (2.0 * n);
        worst = std::max(worst, std::abs(ctx.lambda(n, a, b, LambdaRoute::green) - expect) / expect);
      }
  return {worst <= 1e-8, fmt("max relative error over n <= 32 = %.3e", worst)};
}

Outcome route_agreement() {
  const std::vector<double> radii{0.6, 1.0, 1.4};
  const SpectralContext ctx(bump(), radii);
  double worst = 0.0;
  int first = 64, count = 0;
  for (double a : radii)
    for (double b : radii) {
      const int lo = ctx.contraction_mode(a, b);
      first = std::min(first, lo);
      for (int n = lo; n <= 64; ++n, ++count) worst = std::max(worst, ctx.route_difference(n, a, b));
    }
  return {worst <= 1e-5, fmt("%d cases, n from %d to 64, max relative difference = %.3e", count, first, worst)};
}

Outcome positivity_monotonicity() {
  const double M = threshold_M(bump(), 1.0, 1.0);
  const SpectralContext ctx(bump(), {1.0});
  const int lo = static_cast<int>(std::floor(M)) + 1;
  const int hi = static_cast<int>(std::floor(M + 64.0));
  int violations = 0;
  double previous = 0.0;
  for (int n = lo; n <= hi; ++n) {
    const double value = ctx.lambda(n, 1.0, 1.0);
    if (!(value > 0.0)) ++violations;
    if (n > lo && !(value < previous)) ++violations;
    previous = value;
  }
  return {violations == 0, fmt("M(b) = %.4f, n in [%d, %d], %d violations", M, lo, hi, violations)};
}

Outcome fn_bound_check() {
  const std::vector<double> radii{0.6, 1.0, 1.4};
  const SpectralContext ctx(bump(), radii);
  int violations = 0, count = 0;
  double tightest = 0.0;
  for (double a : radii)
    for (double b : radii) {
      const double A = std::max({a, b, bump().r_inf()});
      const int lo = static_cast<int>(std::ceil(0.5 * A * bump().theta_sup()));
      for (int n = std::max(lo, 1); n <= 64; ++n, ++count) {
        const double ratio = std::abs(ctx.f(n, a, b)) / fn_bound(bump(), n, a, b);
        tightest = std::max(tightest, ratio);
        if (!(ratio <= 1.0)) ++violations;
      }
    }
  return {violations == 0, fmt("%d cases, %d violations, largest |f_n| / bound = %.3e", count, violations, tightest)};
}

Outcome multipliers() {
  double worst_simply = 0.0, worst_doubly = 0.0;
  for (const DepthProfile* p : {&flat(), &bump()}) {
    const PatchEvaluator ev(*p, 3.0);
    for (int m : {2, 3}) {
      const double omega = q_factor(*p, 1.0, 0.0) - ev.greens().get(m).green(1.0, 1.0) + 0.05;
      for (const MultiplierRow& row : multiplier_check(ev, 1.0, omega, m, 8, 1e-6))
        worst_simply = std::max(worst_simply, row.rel_error);
    }
    for (int m : {2, 3})
      for (const MatrixMultiplierRow& row : multiplier_check_doubly(ev, 1.0, 0.7, 0.2, m, 8, 1e-5))
        worst_doubly = std::max(worst_doubly, row.rel_error);
  }
  const bool pass = worst_simply <= 1e-4 && worst_doubly <= 1e-4;
  return {pass, fmt("max relative error: simply %.3e, doubly (1, 0.7) %.3e (m = 2, 3, n <= 8, constant and bump)", worst_simply,
                    worst_doubly)};
}

Outcome annulus_spectrum() {
  const SpectralContext ctx(flat(), {1.0, 0.4, 0.5});
  const DoublySpectrum s = omega_doubly(ctx, 1.0, 0.4, 3);
  const double scale = matrix_Mn(ctx, 0.0, 1.0, 0.4, 3).matrix.squaredNorm();
  const double det = std::max(std::abs(matrix_Mn(ctx, s.omega_minus, 1.0, 0.4, 3).det),
                              std::abs(matrix_Mn(ctx, s.omega_plus, 1.0, 0.4, 3).det));
  bool raised = false;
  try {
    omega_doubly(ctx, 1.0, 0.5, 3);
  } catch (const DegenerateSpectrumError&) {
    raised = true;
  }
  const double e_minus = std::abs(s.omega_minus - 0.168);
  const double e_plus = std::abs(s.omega_plus - 0.252);
  const bool pass = e_minus <= 1e-6 && e_plus <= 1e-6 && det <= 1e-10 * scale && raised;
  return {pass, fmt("Omega- = %.10f, Omega+ = %.10f, |det| = %.2e (scale %.2e), degenerate case %s", s.omega_minus,
                    s.omega_plus, det, scale, raised ? "raised" : "NOT raised")};
}

Outcome bump_branch() {
  const double a = 1.0;
  BranchOptions o;
  o.K = 32;
  o.ds = 0.02 * a * a;
  o.s_max = 10 * o.ds;
  const PatchEvaluator ev(bump(), 3.0 * a);
  const VStateBranch br = continue_simply(ev, a, 4, o);
  double worst_inf = 0.0, worst_fine = 0.0;
  int clean = 0;
  for (const BranchStep& st : br.steps) {
    worst_inf = std::max(worst_inf, st.residual_inf);
    worst_fine = std::max(worst_fine, st.residual_fine);
    if (st.s > 0.0 && st.residual_inf <= 1e-9 && st.residual_fine <= 1e-8) ++clean;
  }
  const int steps = static_cast<int>(br.steps.size()) - 1;
  const double drift = std::abs(br.omega_extrapolated - br.omega_bifurcation);
  const bool pass = steps == 10 && worst_inf <= 1e-9 && worst_fine <= 1e-8 && drift <= 1e-6;
  std::string detail = fmt("%d of 10 steps (%d within both residual bounds), max residual %.2e (Newton grid), %.2e "
                           "(doubled grid), |Omega(0) - Omega_4| = %.2e",
                           steps, clean, worst_inf, worst_fine, drift);
  if (br.truncated) detail += "; " + br.diagnostic;
  return {pass, detail};
}

Outcome kirchhoff() {
  const double a = 1.0;
  BranchOptions o;
  o.K = 16;
  o.ds = 0.0125 * a * a;
  o.s_max = 0.05 * a * a;
  const PatchEvaluator ev(flat(), 3.0 * a);
  const VStateBranch br = continue_simply(ev, a, 2, o);
  if (br.truncated) return {false, br.diagnostic};
  const BranchStep& st = br.steps.back();
  const double x = st.outer.radius(0.0), y = st.outer.radius(0.5 * 3.14159265358979323846);
  const double lambda = std::min(x, y) / std::max(x, y);
  const double expect = lambda / ((1.0 + lambda) * (1.0 + lambda));
  const double rel = std::abs(st.omega - expect) / expect;
  return {rel <= 1e-3, fmt("s = %.3f, Omega = %.8f, lambda/(1+lambda)^2 = %.8f, relative error %.2e", st.s, st.omega,
                           expect, rel)};
}

Outcome oracle_suite() {
  SuiteOptions o;
  const auto results = run_verify_suite(bump(), o);
  std::ostringstream detail;
  bool pass = true;
  for (const CheckResult& r : results) {
    pass = pass && r.pass;
    detail << r.check << "=" << fmt("%.3e", r.value) << (r.pass ? " ok" : " failed") << "; ";
  }
  std::string text = detail.str();
  if (text.size() >= 2) text.resize(text.size() - 2);
  return {pass, text};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, 10.0, euler_limit},      {2, 30.0, constant_closed_form}, {3, 120.0, route_agreement},
      {4, 600.0, positivity_monotonicity}, {5, 600.0, fn_bound_check}, {6, 600.0, multipliers},
      {7, 600.0, annulus_spectrum}, {8, 300.0, bump_branch},         {9, 600.0, kirchhoff},
      {10, 600.0, oracle_suite},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = elapsed <= c.budget_s;
    const bool pass = out.pass && in_time;
    if (!pass) ++failed;
    std::printf("criterion %d: %s %s (%.1f s of %.0f s)\n", c.id, pass ? "PASS" : "FAIL", out.detail.c_str(), elapsed,
                c.budget_s);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return 0;
}
