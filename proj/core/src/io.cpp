#include "lakevort/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "lakevort/error.hpp"

namespace lakevort {

namespace {

template <typename T>
T field(const nlohmann::json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: field '") + key + "': " + e.what());
  }
}

}  // namespace

RunConfig RunConfig::from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");
  RunConfig cfg;
  if (doc.contains("profile")) cfg.profile_spec = doc.at("profile");
  if (doc.contains("grid")) {
    const auto& g = doc.at("grid");
    if (!g.is_object()) throw ConfigError("config: 'grid' must be an object");
    cfg.grid.r_out = field(g, "r_out", cfg.grid.r_out);
    cfg.grid.n_r = field(g, "n_r", cfg.grid.n_r);
    cfg.grid.theta_n = field(g, "theta_n", cfg.grid.theta_n);
    cfg.grid.l_max_factor = field(g, "L_max_factor", cfg.grid.l_max_factor);
  }
  if (doc.contains("tolerances")) {
    const auto& t = doc.at("tolerances");
    if (!t.is_object()) throw ConfigError("config: 'tolerances' must be an object");
    cfg.tolerances.newton_tol = field(t, "newton_tol", cfg.tolerances.newton_tol);
    cfg.tolerances.quad_tol = field(t, "quad_tol", cfg.tolerances.quad_tol);
    cfg.tolerances.crosscheck_tol = field(t, "crosscheck_tol", cfg.tolerances.crosscheck_tol);
  }
  if (doc.contains("workflow")) cfg.workflow = doc.at("workflow");
  cfg.validate();
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return from_json(parse_json(text.str(), path.string()));
}

nlohmann::json RunConfig::to_json() const {
  return {{"profile", profile_spec},
          {"grid",
           {{"r_out", grid.r_out}, {"n_r", grid.n_r}, {"theta_n", grid.theta_n}, {"L_max_factor", grid.l_max_factor}}},
          {"tolerances",
           {{"newton_tol", tolerances.newton_tol},
            {"quad_tol", tolerances.quad_tol},
            {"crosscheck_tol", tolerances.crosscheck_tol}}},
          {"workflow", workflow}};
}

void RunConfig::validate() const {
  const DepthProfile p = profile();
  if (grid.r_out != 0.0 && !(grid.r_out >= 2.0 * p.r_inf()))
    throw ConfigError("config: r_out must be at least 2 r_inf");
  if (grid.n_r < 256) throw ConfigError("config: n_r must be at least 256");
  if (grid.theta_n < 16) throw ConfigError("config: theta_n must be at least 16");
  if (grid.l_max_factor < 1) throw ConfigError("config: L_max_factor must be positive");
  if (!(tolerances.newton_tol > 0.0) || !(tolerances.quad_tol > 0.0) || !(tolerances.crosscheck_tol > 0.0))
    throw ConfigError("config: tolerances must be positive");
  if (!workflow.is_object()) throw ConfigError("config: 'workflow' must be an object");
}

DepthProfile RunConfig::profile() const { return DepthProfile::from_json(profile_spec); }

double RunConfig::r_out(double max_radius) const {
  if (grid.r_out > 0.0) return std::max(grid.r_out, 2.0 * max_radius);
  return 2.0 * std::max(profile().r_inf(), max_radius);
}

std::string RunConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(to_json().dump())));
  return buf;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

nlohmann::json parse_json(const std::string& text, const std::string& what) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("malformed JSON in " + what + ": " + e.what());
  }
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw ConfigError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw ConfigError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

std::string stamp_csv(const std::string& csv, const std::string& config_hash) {
  return "# config_hash=" + config_hash + "\n" + csv;
}

}  // namespace lakevort
