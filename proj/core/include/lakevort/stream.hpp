#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "lakevort/contour.hpp"
#include "lakevort/depth.hpp"
#include "lakevort/mode_green.hpp"

namespace lakevort {

/// Radial solution W of W'' + W'/r = b(r)^{3/2} with W(0) = W'(0) = 0.
class LogPotential {
 public:
  explicit LogPotential(const DepthProfile& p, std::size_t samples = 4096);
  double value(double r) const;
  double slope(double r) const;

 private:
  DepthProfile profile_;
  double step_ = 0.0;
  double w_inf_ = 1.0;
  std::vector<double> w_, moment_, potential_;
};

/// H(r) = b(0) log r + int_0^r (b(s) - b(0)) / s ds, an antiderivative of b(r)/r.
class LogIntegral {
 public:
  explicit LogIntegral(const DepthProfile& p, std::size_t samples = 4096);
  double operator()(double r) const;

 private:
  DepthProfile profile_;
  double b0_ = 1.0;
  double step_ = 0.0;
  std::vector<double> e_;
};

enum class StreamMethod {
  split_kernel,  ///< explicit log part on the boundary plus smooth mode remainders
  mode_sum,      ///< truncated angular mode sum of the full Green function
};

struct EvaluatorOptions {
  std::size_t theta_nodes = 256;  ///< boundary nodes, rounded up to a multiple of 2m
  int l_max_factor = 8;           ///< angular truncation L_max = l_max_factor * m
  std::size_t n_r = 2048;         ///< radial grid size for mode Green functions
  std::size_t band_order = 0;     ///< Gauss nodes per band piece; 0 selects 32 + 4 L_max/m
  StreamMethod method = StreamMethod::split_kernel;
  bool exploit_symmetry = true;   ///< evaluate one half period and extend by symmetry
};

/// Stream function trace along a contour: psi(R(theta) e^{i theta}) and its
/// theta derivative at equispaced angles.
struct BoundaryTrace {
  std::vector<double> theta;
  std::vector<double> value;   ///< empty unless values were requested
  std::vector<double> dtheta;
};

/// Stream function and its polar derivatives at one point.
struct StreamPoint {
  double psi = 0.0;
  double d_rho = 0.0;
  double d_theta = 0.0;
};

/// Evaluates the stream function generated by b 1_D for star-shaped patches D.
class PatchEvaluator {
 public:
  PatchEvaluator(DepthProfile p, double max_radius, EvaluatorOptions options = {});

  const DepthProfile& profile() const { return profile_; }
  const EvaluatorOptions& options() const { return options_; }
  const GreenCache& greens() const { return *greens_; }
  std::size_t theta_nodes(int m, std::size_t multiplier = 1) const;
  int l_max(int m) const { return options_.l_max_factor * m; }

  /// Trace on `on` of the stream function of b 1_{domain}.
  BoundaryTrace trace(const FourierContour& domain, const FourierContour& on, bool with_values = false,
                      std::size_t nodes = 0) const;

  /// Stream function of b 1_{domain} at (rho, theta) from the mode sum up to l_max.
  StreamPoint point(const FourierContour& domain, double rho, double theta, int l_max) const;

  /// Angular source amplitudes g_l(rho), l = 0, m, ..., l_max, from exact arcs
  /// on the fundamental sector.
  std::vector<double> source_modes(const FourierContour& domain, double rho, int l_max) const;

 private:
  struct Band;
  struct RadialData;
  Band band(const FourierContour& domain, double alpha, int l_max) const;
  RadialData radial(const FourierContour& domain, const Band& band, double alpha, bool full,
                    bool values) const;
  const std::vector<double>& kress_weights(std::size_t n) const;

  DepthProfile profile_;
  EvaluatorOptions options_;
  std::unique_ptr<GreenCache> greens_;
  LogPotential potential_;
  LogIntegral log_integral_;
  mutable std::mutex mutex_;
  mutable std::map<std::size_t, std::vector<double>> kress_;
  mutable std::map<double, double> disc_log_moment_;
};

}  // namespace lakevort
