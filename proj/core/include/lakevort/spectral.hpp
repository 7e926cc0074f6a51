#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "lakevort/depth.hpp"
#include "lakevort/mode_green.hpp"

namespace lakevort {

enum class LambdaRoute { green, fixedpoint };
enum class Branch { minus, plus };

/// min(alpha/beta, beta/alpha).
double min_ratio(double alpha, double beta);

/// U_n(alpha, beta) = int_0^inf Theta(r) m^n(r, alpha) m^n(r, beta) dr for the
/// profile's Theta.
double u_n_integral(const DepthProfile& p, int n, double alpha, double beta);
/// Same integral for an arbitrary Theta supported on [0, support_end]
/// (support_end may be +infinity).
double u_n_integral(const std::function<double(double)>& theta, double support_end, int n,
                    double alpha, double beta);

/// Solution of the second-kind identity for f_n(alpha, .) by trapezoidal
/// Nystrom discretisation on a piecewise uniform grid, with one Richardson
/// step between grid spacings h and h/2.
///
/// Every radius passed at construction is a grid node, so the kernel kinks at
/// the evaluation radii fall on nodes.  The system matrix does not depend on
/// alpha and is factorised once.
class FixedPointSolver {
 public:
  FixedPointSolver(const DepthProfile& p, int n, std::vector<double> radii,
                   std::size_t base_nodes = 512);

  int mode() const { return n_; }
  double extent() const { return extent_; }
  /// Radii of the coarse grid (including 0 and every construction radius).
  const std::vector<double>& nodes() const { return levels_[0].r; }
  /// f_n(alpha, r_j) on the coarse nodes; alpha must be a construction radius.
  std::vector<double> solve(double alpha) const;
  /// f_n(alpha, beta) for construction radii alpha and beta.
  double value(double alpha, double beta) const;

 private:
  struct Level {
    std::vector<double> r;
    std::vector<double> weight;
    std::vector<double> sqrt_b;
    std::vector<double> theta;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu;
  };
  Level build_level(std::size_t refine) const;
  Eigen::VectorXd solve_level(const Level& level, double alpha) const;
  std::size_t index_of(const Level& level, double r) const;

  DepthProfile profile_;
  int n_;
  std::vector<double> breakpoints_;
  double extent_ = 0.0;
  double spacing_ = 0.0;
  std::vector<Level> levels_;
};

/// Options shared by all spectral computations.
struct SpectralOptions {
  std::size_t n_r = 2048;          ///< radial grid size for mode Green functions
  double r_out = 0.0;              ///< outer radius; 0 selects max(2 r_inf, 2 max radius)
  std::size_t nystrom_nodes = 512; ///< base node count for the fixed-point route
  double crosscheck_tol = 1e-5;    ///< relative agreement required between routes
};

/// Shared state for spectral quantities of one profile and radius set.
class SpectralContext {
 public:
  SpectralContext(DepthProfile p, std::vector<double> radii, SpectralOptions options = {});

  const DepthProfile& profile() const { return profile_; }
  const SpectralOptions& options() const { return options_; }
  const GreenCache& greens() const { return *greens_; }
  const std::vector<double>& radii() const { return radii_; }

  double lambda(int n, double alpha, double beta, LambdaRoute route = LambdaRoute::green) const;
  /// Lambda_n minus its leading term sqrt(b(alpha) b(beta)) m^n / (2n).
  double f(int n, double alpha, double beta, LambdaRoute route = LambdaRoute::green) const;
  /// Green-route Lambda after checking agreement with the fixed-point route.
  double lambda_checked(int n, double alpha, double beta) const;
  /// Relative difference between the two routes.
  double route_difference(int n, double alpha, double beta) const;
  double q(double alpha, double beta) const { return q_factor(profile_, alpha, beta); }
  /// Smallest n for which the fixed-point map is a contraction, ceil(A sup|Theta| / 2).
  int contraction_mode(double alpha, double beta) const;

  const FixedPointSolver& fixed_point(int n) const;

 private:
  DepthProfile profile_;
  std::vector<double> radii_;
  SpectralOptions options_;
  std::unique_ptr<GreenCache> greens_;
  mutable std::mutex mutex_;
  mutable std::map<int, std::unique_ptr<FixedPointSolver>> fixed_;
};

/// Lambda_n(alpha, beta) by the selected route (builds a temporary context).
double lambda_n(const DepthProfile& p, int n, double alpha, double beta,
                LambdaRoute route = LambdaRoute::green);

/// M(b) = 16 A sup|Theta| max(1, 1/sqrt(b(alpha))), A = max(alpha, beta, r_inf).
double threshold_M(const DepthProfile& p, double alpha, double beta);

/// Upper bound 2 A sqrt(b(beta)) (m^n / n^2) (delta_{alpha beta} (1/n - 1) + 1) sup|Theta| on
/// |f_n(alpha, beta)|, valid for n >= A sup|Theta| / 2 with A = max(alpha, beta, r_inf).
double fn_bound(const DepthProfile& p, int n, double alpha, double beta);

/// Omega_m = Q(a, 0) - Lambda_m(a, a).
double omega_simply(const SpectralContext& ctx, double a, int m);

struct DoublySpectrum {
  double omega_minus = 0.0;
  double omega_plus = 0.0;
  double delta = 0.0;
};

/// The two angular velocities of the annulus; throws DegenerateSpectrumError if Delta <= 0.
DoublySpectrum omega_doubly(const SpectralContext& ctx, double a1, double a2, int m);
/// Same quantities without the degeneracy check (delta may be <= 0, roots NaN).
DoublySpectrum omega_doubly_unchecked(const SpectralContext& ctx, double a1, double a2, int m);

struct ThresholdReport {
  int n = 0;
  int window = 0;
  std::vector<std::string> diagnostics;
};

/// Smallest n0 whose window [n0, n0 + window] satisfies the annulus predicates.
ThresholdReport find_threshold_N(const SpectralContext& ctx, double a1, double a2, int window = 64,
                                 int n_max = 256);

struct MatrixMn {
  Eigen::Matrix2d matrix;
  double det = 0.0;
};

MatrixMn matrix_Mn(const SpectralContext& ctx, double omega, double a1, double a2, int n);

/// Null direction (Omega - Lambda(a2,a2), -(b(a1)/b(a2)) Lambda(a1,a2)) of M_m at Omega_m^{+-}.
Eigen::Vector2d kernel_generator(const SpectralContext& ctx, double a1, double a2, int m,
                                 Branch branch);

/// One row of a spectral table.
struct SpectralRow {
  int n = 0;
  double lambda11 = 0.0, lambda22 = 0.0, lambda12 = 0.0;
  double f11 = 0.0, f22 = 0.0, f12 = 0.0;
  double route_difference = 0.0;  ///< largest relative route difference, NaN if not computed
  double q = 0.0;
  double omega_minus = 0.0, omega_plus = 0.0, delta = 0.0;
};

/// Spectral data for a disc (one radius) or an annulus (two radii).
struct SpectralTable {
  nlohmann::json profile;
  std::vector<double> radii;
  std::vector<SpectralRow> rows;
  bool doubly() const { return radii.size() == 2; }
  /// CSV text with a header row.
  std::string to_csv() const;
};

/// Builds the table for n = 1..n_max; routes are compared for every n at or
/// above the contraction mode when compare_routes is set.
SpectralTable build_spectral_table(const SpectralContext& ctx, const std::vector<double>& radii,
                                   int n_max, bool compare_routes, int jobs = 1);

}  // namespace lakevort
