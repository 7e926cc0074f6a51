#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lakevort/branch.hpp"
#include "lakevort/error.hpp"
#include "lakevort/io.hpp"
#include "lakevort/spectral.hpp"
#include "lakevort/verify.hpp"

namespace {

using namespace lakevort;

enum ExitCode : int { kOk = 0, kConfig = 2, kCrossCheck = 3, kTruncated = 4, kVerify = 5 };

struct Common {
  std::string config_path;
  std::string out;
  std::string profile;
  int jobs = 1;
};

struct Geometry {
  std::optional<double> a, a1, a2;
};

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("lakevort");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* level = std::getenv("LAKEVORT_LOG")) spdlog::set_level(spdlog::level::from_str(level));
}

RunConfig load_config(const Common& c) {
  RunConfig cfg = c.config_path.empty() ? RunConfig{} : RunConfig::load(c.config_path);
  if (!c.profile.empty()) cfg.profile_spec = parse_json(c.profile, "--profile");
  if (c.jobs < 1) throw ConfigError("--jobs must be at least 1");
  cfg.validate();
  return cfg;
}

template <typename T>
T pick(const std::optional<T>& flag, const RunConfig& cfg, const char* key, T fallback) {
  if (flag) return *flag;
  if (cfg.workflow.contains(key)) {
    try {
      return cfg.workflow.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("workflow field '") + key + "': " + e.what());
    }
  }
  return fallback;
}

template <typename T>
std::optional<T> pick_optional(const std::optional<T>& flag, const RunConfig& cfg, const char* key) {
  if (flag) return flag;
  if (cfg.workflow.contains(key)) return pick<T>(std::nullopt, cfg, key, T{});
  return std::nullopt;
}

/// Radii of the request: one radius for a disc, two (a1 > a2) for an annulus.
std::vector<double> resolve_radii(const Geometry& g, RunConfig& cfg) {
  const auto a = pick_optional(g.a, cfg, "a");
  const auto a1 = pick_optional(g.a1, cfg, "a1");
  const auto a2 = pick_optional(g.a2, cfg, "a2");
  if (a && (a1 || a2)) throw ConfigError("give either --a or --a1/--a2, not both");
  if (a1.has_value() != a2.has_value()) throw ConfigError("--a1 and --a2 must be given together");
  if (a1) {
    if (!(*a2 > 0.0) || !(*a1 > *a2)) throw ConfigError("need 0 < a2 < a1");
    cfg.workflow["a1"] = *a1;
    cfg.workflow["a2"] = *a2;
    return {*a1, *a2};
  }
  const double radius = a.value_or(1.0);
  if (!(radius > 0.0)) throw ConfigError("a must be positive");
  cfg.workflow["a"] = radius;
  return {radius};
}

void emit(const std::string& out, const std::string& content) {
  if (out.empty()) {
    std::cout << content;
    return;
  }
  write_atomic(out, content);
  spdlog::info("wrote {}", out);
}

SpectralOptions spectral_options(const RunConfig& cfg, const std::vector<double>& radii) {
  SpectralOptions o;
  o.n_r = cfg.grid.n_r;
  o.r_out = cfg.r_out(*std::max_element(radii.begin(), radii.end()));
  o.crosscheck_tol = cfg.tolerances.crosscheck_tol;
  return o;
}

EvaluatorOptions evaluator_options(const RunConfig& cfg) {
  EvaluatorOptions o;
  o.n_r = cfg.grid.n_r;
  o.theta_nodes = cfg.grid.theta_n;
  o.l_max_factor = cfg.grid.l_max_factor;
  return o;
}

std::pair<int, int> parse_range(const std::string& text) {
  const auto colon = text.find(':');
  try {
    if (colon == std::string::npos) {
      const int m = std::stoi(text);
      return {m, m};
    }
    return {std::stoi(text.substr(0, colon)), std::stoi(text.substr(colon + 1))};
  } catch (const std::exception&) {
    throw ConfigError("--m-range must look like 2:8");
  }
}

std::string number(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

int cmd_spectrum(const Common& c, const Geometry& g, std::optional<int> n_max_flag) {
  RunConfig cfg = load_config(c);
  const std::vector<double> radii = resolve_radii(g, cfg);
  const int n_max = pick(n_max_flag, cfg, "n_max", 16);
  if (n_max < 1) throw ConfigError("--n-max must be at least 1");
  cfg.workflow["n_max"] = n_max;
  cfg.workflow["command"] = "spectrum";
  const SpectralContext ctx(cfg.profile(), radii, spectral_options(cfg, radii));
  const SpectralTable table = build_spectral_table(ctx, radii, n_max, true, c.jobs);
  emit(c.out, stamp_csv(table.to_csv(), cfg.hash()));
  double worst = 0.0;
  for (const SpectralRow& row : table.rows)
    if (std::isfinite(row.route_difference)) worst = std::max(worst, row.route_difference);
  if (worst > cfg.tolerances.crosscheck_tol) {
    spdlog::error("route disagreement {:.3e} exceeds crosscheck_tol {:.3e}", worst, cfg.tolerances.crosscheck_tol);
    return kCrossCheck;
  }
  return kOk;
}

int cmd_bifpoints(const Common& c, const Geometry& g, const std::string& range_flag) {
  RunConfig cfg = load_config(c);
  const std::vector<double> radii = resolve_radii(g, cfg);
  const std::string range = range_flag.empty() ? pick<std::string>(std::nullopt, cfg, "m_range", "1:8") : range_flag;
  const auto [m_lo, m_hi] = parse_range(range);
  if (m_lo < 1 || m_hi < m_lo) throw ConfigError("--m-range needs 1 <= lo <= hi");
  cfg.workflow["m_range"] = range;
  cfg.workflow["command"] = "bifpoints";
  const DepthProfile p = cfg.profile();
  const SpectralContext ctx(p, radii, spectral_options(cfg, radii));
  std::ostringstream csv;
  if (radii.size() == 1) {
    const double a = radii[0];
    const double big_m = threshold_M(p, a, a);
    csv << "m,Omega,Q,Lambda_aa,threshold_M,above_threshold\n";
    for (int m = m_lo; m <= m_hi; ++m) {
      const double lambda = ctx.lambda(m, a, a);
      const double q = ctx.q(a, 0.0);
      csv << m << ',' << number(q - lambda) << ',' << number(q) << ',' << number(lambda) << ',' << number(big_m)
          << ',' << (m > big_m ? 1 : 0) << '\n';
    }
  } else {
    const double a1 = radii[0], a2 = radii[1];
    int threshold = -1;
    try {
      threshold = find_threshold_N(ctx, a1, a2).n;
    } catch (const Error& e) {
      spdlog::warn("threshold search failed: {}", e.what());
    }
    csv << "m,Omega_minus,Omega_plus,Delta,degenerate,threshold_N\n";
    for (int m = m_lo; m <= m_hi; ++m) {
      bool degenerate = false;
      DoublySpectrum s;
      try {
        s = omega_doubly(ctx, a1, a2, m);
      } catch (const DegenerateSpectrumError& e) {
        degenerate = true;
        s = omega_doubly_unchecked(ctx, a1, a2, m);
        spdlog::warn("m = {}: {}", m, e.what());
      }
      csv << m << ',' << number(s.omega_minus) << ',' << number(s.omega_plus) << ',' << number(s.delta) << ','
          << (degenerate ? 1 : 0) << ',' << threshold << '\n';
    }
  }
  emit(c.out, stamp_csv(csv.str(), cfg.hash()));
  return kOk;
}

struct BranchFlags {
  std::optional<int> m;
  std::string sign;
  std::optional<double> s_max, ds;
  std::optional<int> K;
  bool force = false;
  bool allow_truncation = false;
};

int cmd_branch(const Common& c, const Geometry& g, const BranchFlags& f) {
  RunConfig cfg = load_config(c);
  const std::vector<double> radii = resolve_radii(g, cfg);
  const int m = pick(f.m, cfg, "m", 2);
  if (m < 1) throw ConfigError("--m must be at least 1");
  BranchOptions o;
  o.s_max = pick(f.s_max, cfg, "s_max", o.s_max);
  o.ds = pick(f.ds, cfg, "ds", o.ds);
  o.K = pick(f.K, cfg, "K", o.K);
  o.newton_tol = cfg.tolerances.newton_tol;
  o.jobs = c.jobs;
  if (!(o.s_max >= 0.0) || !(o.ds > 0.0)) throw ConfigError("need s_max >= 0 and ds > 0");
  if (o.K < 2) throw ConfigError("K must be at least 2");
  cfg.workflow.update({{"m", m}, {"s_max", o.s_max}, {"ds", o.ds}, {"K", o.K}, {"command", "branch"}});
  const DepthProfile p = cfg.profile();
  const double outer = radii[0];
  const double reach = std::sqrt(outer * outer + 4.0 * o.s_max) * 1.5;
  const PatchEvaluator ev(p, cfg.r_out(reach) / 2.0, evaluator_options(cfg));

  VStateBranch branch;
  if (radii.size() == 1) {
    const double big_m = threshold_M(p, outer, outer);
    if (!(m > big_m) && !f.force)
      throw ConfigError("m = " + std::to_string(m) + " does not exceed M(b) = " + number(big_m) + " (use --force)");
    branch = continue_simply(ev, outer, m, o);
  } else {
    const std::string sign = f.sign.empty() ? pick<std::string>(std::nullopt, cfg, "sign", "plus") : f.sign;
    if (sign != "plus" && sign != "minus") throw ConfigError("--sign must be plus or minus");
    cfg.workflow["sign"] = sign;
    if (!f.force) {
      const SpectralContext ctx(p, radii, spectral_options(cfg, radii));
      const int threshold = find_threshold_N(ctx, radii[0], radii[1]).n;
      if (m < threshold)
        throw ConfigError("m = " + std::to_string(m) + " is below N = " + std::to_string(threshold) + " (use --force)");
    }
    branch = continue_doubly(ev, radii[0], radii[1], m, sign == "plus" ? Branch::plus : Branch::minus, o);
  }

  nlohmann::json doc = branch.to_json();
  doc["config_hash"] = cfg.hash();
  doc["config"] = cfg.to_json();
  emit(c.out, doc.dump(2) + "\n");
  if (!c.out.empty()) {
    const std::filesystem::path base(c.out);
    const std::filesystem::path dir = base.parent_path() / (base.stem().string() + "_boundaries");
    const std::size_t nodes = std::max<std::size_t>(cfg.grid.theta_n, 64);
    for (std::size_t k = 0; k < branch.steps.size(); ++k) {
      const BranchStep& st = branch.steps[k];
      char name[64];
      std::snprintf(name, sizeof name, "step_%03zu_outer.csv", k);
      write_atomic(dir / name, stamp_csv(st.outer.boundary_csv(nodes), cfg.hash()));
      if (st.inner) {
        std::snprintf(name, sizeof name, "step_%03zu_inner.csv", k);
        write_atomic(dir / name, stamp_csv(st.inner->boundary_csv(nodes), cfg.hash()));
      }
    }
  }
  if (branch.truncated) {
    spdlog::warn("{}", branch.diagnostic);
    if (!f.allow_truncation) return kTruncated;
  }
  return kOk;
}

int cmd_verify(const Common& c, const std::string& suite) {
  RunConfig cfg = load_config(c);
  SuiteOptions o;
  o.selector = suite.empty() ? pick<std::string>(std::nullopt, cfg, "suite", "all") : suite;
  o.quad_tol = cfg.tolerances.quad_tol;
  o.newton_tol = cfg.tolerances.newton_tol;
  o.jobs = c.jobs;
  cfg.workflow.update({{"suite", o.selector}, {"command", "verify"}});
  const std::vector<CheckResult> results = run_verify_suite(cfg.profile(), o);
  nlohmann::json report = suite_report(results);
  report["config_hash"] = cfg.hash();
  emit(c.out, report.dump(2) + "\n");
  for (const CheckResult& r : results)
    if (!r.pass) spdlog::error("check {} failed: value {:.3e}, tolerance {:.3e}", r.check, r.value, r.tolerance);
  return report["pass"].get<bool>() ? kOk : kVerify;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Rotating vortex patches of the lake equations with radial depth"};
  app.require_subcommand(1);

  Common common;
  Geometry geometry;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "Run configuration JSON file");
    sub->add_option("--out", common.out, "Output file (stdout when omitted)");
    sub->add_option("--profile", common.profile, "Inline JSON depth profile");
    sub->add_option("--jobs", common.jobs, "Worker threads")->check(CLI::PositiveNumber);
  };
  const auto add_geometry = [&](CLI::App* sub) {
    sub->add_option("--a", geometry.a, "Disc radius");
    sub->add_option("--a1", geometry.a1, "Outer annulus radius");
    sub->add_option("--a2", geometry.a2, "Inner annulus radius");
  };

  std::optional<int> n_max;
  auto* spectrum = app.add_subcommand("spectrum", "Spectral table of Lambda_n, f_n and angular velocities");
  add_common(spectrum);
  add_geometry(spectrum);
  spectrum->add_option("--n-max", n_max, "Largest mode");

  std::string m_range;
  auto* bif = app.add_subcommand("bifpoints", "Bifurcation angular velocities over a range of m");
  add_common(bif);
  add_geometry(bif);
  bif->add_option("--m-range", m_range, "Mode range lo:hi");
  std::optional<int> single_m;
  bif->add_option("--m", single_m, "Single mode");

  BranchFlags bf;
  auto* branch = app.add_subcommand("branch", "Continue a branch of V-states from its bifurcation point");
  add_common(branch);
  add_geometry(branch);
  branch->add_option("--m", bf.m, "Symmetry");
  branch->add_option("--sign", bf.sign, "Annulus branch: plus or minus");
  branch->add_option("--s-max", bf.s_max, "Largest amplitude");
  branch->add_option("--ds", bf.ds, "Amplitude step");
  branch->add_option("--K", bf.K, "Fourier modes per contour");
  branch->add_flag("--force", bf.force, "Skip the symmetry threshold check");
  branch->add_flag("--allow-truncation", bf.allow_truncation, "Exit 0 even when the branch stops early");

  std::string suite;
  auto* verify = app.add_subcommand("verify", "Run the verification oracles");
  add_common(verify);
  verify->add_option("--suite", suite, "all, fd, self-adjoint, decomposition, log-identity or rigid-rotation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (*spectrum) return cmd_spectrum(common, geometry, n_max);
    if (*bif) {
      if (single_m && !m_range.empty()) throw ConfigError("give either --m or --m-range");
      if (single_m) m_range = std::to_string(*single_m);
      return cmd_bifpoints(common, geometry, m_range);
    }
    if (*branch) return cmd_branch(common, geometry, bf);
    if (*verify) return cmd_verify(common, suite);
  } catch (const ConfigError& e) {
    spdlog::error("{}", e.what());
    return kConfig;
  } catch (const DegenerateSpectrumError& e) {
    spdlog::error("{}", e.what());
    return kConfig;
  } catch (const GeometryError& e) {
    spdlog::error("{}", e.what());
    return kConfig;
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return kCrossCheck;
  } catch (const std::filesystem::filesystem_error& e) {
    spdlog::error("{}", e.what());
    return kConfig;
  }
  return kOk;
}
