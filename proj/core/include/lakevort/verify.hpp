#pragma once

#include <functional>
#include <memory>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "lakevort/branch.hpp"
#include "lakevort/contour.hpp"
#include "lakevort/depth.hpp"
#include "lakevort/stream.hpp"

namespace lakevort {

/// Square [-L, L]^2 with n nodes per axis (n odd, so the origin is a node).
struct Grid2D {
  double half_width = 1.0;
  std::size_t n = 0;

  Grid2D() = default;
  Grid2D(double half_width, std::size_t n);
  double spacing() const { return 2.0 * half_width / static_cast<double>(n - 1); }
  double coord(std::size_t i) const { return -half_width + static_cast<double>(i) * spacing(); }
};

/// Node values on a Grid2D, stored row by row (index j * n + i for x_i, y_j).
struct Field2D {
  Grid2D grid;
  std::vector<double> values;

  explicit Field2D(const Grid2D& g) : grid(g), values(g.n * g.n, 0.0) {}
  double& at(std::size_t i, std::size_t j) { return values[j * grid.n + i]; }
  double at(std::size_t i, std::size_t j) const { return values[j * grid.n + i]; }
  /// h^2 sum of the node values.
  double integral() const;
  /// h^2 sum of the product with another field on the same grid.
  double pairing(const Field2D& other) const;
};

using PlaneFunction = std::function<double(double, double)>;

/// Point samples of f at the nodes.
Field2D sample_field(const Grid2D& grid, const PlaneFunction& f);

/// Averages of b 1_D over the node cells [x - h/2, x + h/2] x [y - h/2, y + h/2];
/// D is the region inside `outer` and outside `inner` (when given).
Field2D patch_source(const Grid2D& grid, const DepthProfile& p, const FourierContour& outer,
                     const FourierContour* inner = nullptr);

/// Solves -div(grad psi / b) = source with Dirichlet data on the box boundary, using the
/// flux-conservative five-point stencil with 1/b evaluated at face midpoints.
Field2D fd_solve_2d(const DepthProfile& p, const Field2D& source, const PlaneFunction& boundary);

/// Compactly supported smooth source in the plane.
struct CompactSource {
  PlaneFunction f;
  double support_radius = 0.0;  ///< the support lies in the disc of this radius about the origin
};

/// Unit-mass C^2 bump (4 / (pi w^2)) (1 - d^2/w^2)^3 centred at (cx, cy).
CompactSource unit_bump(double cx, double cy, double width);

/// Stream function of a compact source from its angular mode expansion, in the normalisation
/// whose radial part behaves like -(b_inf mass / 2 pi) log rho at infinity.  Accurate outside
/// the support disc.
class ExteriorStream {
 public:
  /// `max_radius` bounds the evaluation radii.
  ExteriorStream(const DepthProfile& p, const CompactSource& source, double max_radius, int l_max = 32,
                 std::size_t angular_nodes = 512);
  double operator()(double x, double y) const;
  double mass() const { return mass_; }

 private:
  DepthProfile profile_;
  double support_ = 0.0;
  double mass_ = 0.0;
  std::vector<double> cos_moment_, sin_moment_;  ///< per mode l = 1..l_max
  std::unique_ptr<GreenCache> greens_;
  int l_max_ = 0;
};

struct CheckResult {
  std::string check;
  nlohmann::json params;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;

  nlohmann::json to_json() const;
};

struct ConvergenceStudy {
  std::vector<std::size_t> grids;
  std::vector<double> errors;
  std::vector<double> orders;
  /// Least-squares slope of log error against log h.
  double fitted_order = 0.0;
};

/// FD solution of the patch problem for b 1_D against mode sums on probe points away from the
/// boundary band.  Dirichlet data also come from mode sums.
ConvergenceStudy fd_convergence(const PatchEvaluator& ev, const FourierContour& domain,
                                const std::vector<std::size_t>& grids, double half_width, int l_max);

/// |int g1 w2 - int w1 g2| with g_i from fd_solve_2d, Dirichlet data from the normalised
/// exterior expansions.  Throws ConfigError unless both sources have unit mass.
double self_adjointness_check(const DepthProfile& p, const CompactSource& w1, const CompactSource& w2,
                              const Grid2D& grid, int l_max = 32);

/// max over `radii` of |psi_b - (N + phi)| after matching constants at radii.front(), where
/// psi_b solves the full radial problem, N is the Newtonian potential of b f and phi the
/// remainder.  `support` is the support radius of f.
double decomposition_check(const DepthProfile& p, const std::function<double(double)>& f, double support,
                           const std::vector<double>& radii);

/// |(1/2pi) int log|y e^{i theta} - x e^{i eta}| cos(n eta) d eta + cos(n theta) m^n(x,y) / (2n)|
/// with an N-node midpoint rule shifted off eta = theta.
double log_identity_quadrature(int n, double x, double y, double theta, std::size_t nodes);
double log_identity_closed_form(int n, double x, double y, double theta);
double log_identity_error(int n, double x, double y, double theta, std::size_t nodes);

/// Smallest power of two N >= 8 whose doubling changes the quadrature by less than `tol`.
std::size_t log_identity_nodes(int n, double x, double y, double theta, double tol,
                               std::size_t n_max = 1 << 16);

struct RigidRotationResult {
  double deviation = 0.0;  ///< max radial distance of the markers from the rotated boundary
  std::size_t markers = 0;
  std::size_t steps = 0;
};

/// Advects boundary markers by RK4 to time T in the velocity v = -grad^perp psi / b of the patch
/// rotating rigidly at Omega (mode sums up to l_max), and compares them with the initial boundary
/// rotated by Omega T.  A V-state keeps every marker on the rotating boundary.
RigidRotationResult rigid_rotation_check(const PatchEvaluator& ev, const BranchStep& state, double T,
                                         double dt, int l_max, std::size_t markers = 0);

/// Settings of the verification suite.
struct SuiteOptions {
  std::string selector = "all";  ///< all, fd, self-adjoint, decomposition, log-identity, rigid-rotation
  double quad_tol = 1e-10;       ///< convergence target that picks the log-identity node count
  double newton_tol = 1e-10;     ///< Newton tolerance of the V-state used by the rigid-rotation check
  int jobs = 1;
};

/// Names accepted by SuiteOptions::selector besides "all".
const std::vector<std::string>& suite_checks();

/// Runs the selected checks on profile p; throws ConfigError for an unknown selector.
std::vector<CheckResult> run_verify_suite(const DepthProfile& p, const SuiteOptions& options);

/// {"checks": [...], "pass": all passed, "failed": [names]}.
nlohmann::json suite_report(const std::vector<CheckResult>& results);

}  // namespace lakevort
