#pragma once

#include <array>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lakevort/depth.hpp"

namespace lakevort {

/// Closed interval of angles.
struct Arc {
  double begin = 0.0;
  double end = 0.0;
};

/// Patch boundary R(theta) = sqrt(a^2 + 2 sum_k r_k cos(k m theta)).
class FourierContour {
 public:
  FourierContour() = default;
  FourierContour(double a, int m, std::vector<double> coeffs = {});

  double a() const { return a_; }
  int m() const { return m_; }
  const std::vector<double>& coeffs() const { return coeffs_; }
  std::size_t size() const { return coeffs_.size(); }

  /// r(theta) and its first two derivatives.
  std::array<double, 3> r_derivatives(double theta) const;
  double r(double theta) const { return r_derivatives(theta)[0]; }
  /// R(theta), R'(theta), R''(theta).
  std::array<double, 3> radius_derivatives(double theta) const;
  double radius(double theta) const;

  /// True when a^2 + 2 r(theta) > 0 on a fine sample.
  bool is_graph(std::size_t samples = 4096) const;
  /// Throws GeometryError unless is_graph().
  void validate() const;

  /// Angles in [0, pi/m] where R' vanishes, sorted, always containing 0 and pi/m.
  const std::vector<double>& critical_angles() const { return critical_; }
  /// R at the critical angles.
  const std::vector<double>& critical_radii() const { return critical_radius_; }
  double min_radius() const { return r_min_; }
  double max_radius() const { return r_max_; }

  /// Arcs of [0, pi/m] on which R(eta) > rho.
  std::vector<Arc> arcs_fundamental(double rho) const;
  /// Arcs of [0, 2 pi) on which R(eta) > rho, found independently of the
  /// symmetry by bracketing on a uniform mesh and bisection.
  std::vector<Arc> arcs_full(double rho) const;

  nlohmann::json to_json() const;
  static FourierContour from_json(const nlohmann::json& doc);
  /// CSV rows theta,x,y at n equispaced angles.
  std::string boundary_csv(std::size_t n) const;

 private:
  void analyse();
  double crossing(double lo, double hi, double rho) const;

  double a_ = 1.0;
  int m_ = 1;
  std::vector<double> coeffs_;
  std::vector<double> critical_;
  std::vector<double> critical_radius_;
  double r_min_ = 1.0;
  double r_max_ = 1.0;
};

/// True if `inner` lies strictly inside `outer` on a fine angular sample.
bool nested(const FourierContour& outer, const FourierContour& inner, std::size_t samples = 4096);

/// Angular cosine coefficients of b 1_D at radius rho:
/// g_0 = (1/2pi) int b 1_D deta, g_l = (1/pi) int b 1_D cos(l eta) deta.
double angular_coefficient(const DepthProfile& p, const FourierContour& outer,
                           const FourierContour* inner, double rho, int l);

/// Radial source amplitudes g_l for l in {0, m, 2m, ..., l_max}.
struct PatchModes {
  int m = 1;
  std::vector<int> modes;
  std::vector<double> radius;
  std::vector<std::vector<double>> g;  ///< g[mode index][radius index]
  /// Largest |g_{l_max}| relative to the largest |g_m| (spectral tail monitor).
  double tail_ratio() const;
  std::string to_csv() const;
};

PatchModes patch_modes(const DepthProfile& p, const FourierContour& outer,
                       const FourierContour* inner, const std::vector<double>& radii, int l_max);

}  // namespace lakevort
