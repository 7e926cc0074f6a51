#pragma once

#include <cstddef>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>

#include "lakevort/depth.hpp"

namespace lakevort {

struct GridSpec {
  double r_out = 0.0;          ///< 0 selects the automatic outer radius
  std::size_t n_r = 2048;
  std::size_t theta_n = 256;
  int l_max_factor = 8;
};

struct Tolerances {
  double newton_tol = 1e-10;
  double quad_tol = 1e-10;
  double crosscheck_tol = 1e-5;
};

/// Validated run configuration shared by every workflow.
struct RunConfig {
  nlohmann::json profile_spec = {{"family", "constant"}, {"b_inf", 1.0}};
  GridSpec grid;
  Tolerances tolerances;
  nlohmann::json workflow = nlohmann::json::object();

  /// Parses and validates; throws ConfigError on malformed or out-of-range fields.
  static RunConfig from_json(const nlohmann::json& doc);
  /// Reads a JSON file and validates it.
  static RunConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
  /// Throws ConfigError unless every invariant holds.
  void validate() const;

  DepthProfile profile() const;
  /// Outer radius of the radial grids: grid.r_out, or 2 max(r_inf, max_radius) when unset.
  double r_out(double max_radius) const;
  /// Hex FNV-1a hash of the canonical JSON form.
  std::string hash() const;
};

/// 64-bit FNV-1a of the bytes of `text`.
std::uint64_t fnv1a(const std::string& text);

/// Parses JSON text, converting parse failures into ConfigError.
nlohmann::json parse_json(const std::string& text, const std::string& what);

/// Writes `content` to a temporary sibling and renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// Prefixes CSV text with a comment line carrying the configuration hash.
std::string stamp_csv(const std::string& csv, const std::string& config_hash);

}  // namespace lakevort
