#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "lakevort/contour.hpp"
#include "lakevort/spectral.hpp"
#include "lakevort/stream.hpp"

namespace lakevort {

struct BranchOptions {
  double s_max = 0.1;
  double ds = 0.02;
  int K = 8;                    ///< Fourier modes per contour
  double newton_tol = 1e-10;    ///< on the sine mode projections
  int max_iterations = 25;
  int max_halvings = 8;
  std::size_t check_multiplier = 2;  ///< theta refinement for the a posteriori residual
  double tail_ratio = 1e-3;     ///< |r_K| <= tail_ratio |r_1| or K is flagged insufficient
  int jobs = 1;
};

enum class BranchLabel { simply, doubly_plus, doubly_minus };
std::string to_string(BranchLabel label);

struct BranchStep {
  double s = 0.0;
  double omega = 0.0;
  FourierContour outer;
  std::optional<FourierContour> inner;
  double residual_inf = 0.0;    ///< max |projection| at Newton resolution
  double residual_fine = 0.0;   ///< sup |F| (or |G|) at refined theta resolution
  int iterations = 0;
  bool tail_ok = true;

  nlohmann::json to_json() const;
};

struct VStateBranch {
  int m = 0;
  BranchLabel label = BranchLabel::simply;
  double omega_bifurcation = 0.0;
  double omega_extrapolated = 0.0;  ///< s -> 0 extrapolation of the computed Omega(s)
  Eigen::Vector2d kernel = Eigen::Vector2d::Zero();  ///< unit kernel direction (doubly only)
  BranchOptions options;
  std::vector<BranchStep> steps;
  bool truncated = false;
  std::string diagnostic;

  nlohmann::json to_json() const;
};

/// Solves for one simply connected V-state with r_1 pinned to s.  `omega` and
/// `coeffs` (size K) are the initial guess.  Throws NumericalError if Newton fails.
BranchStep solve_simply(const PatchEvaluator& ev, double a, int m, double s, double omega,
                        std::vector<double> coeffs, const BranchOptions& options);

/// Continues the simply connected branch bifurcating from Omega_m.
VStateBranch continue_simply(const PatchEvaluator& ev, double a, int m, const BranchOptions& options);

/// Continues a doubly connected branch from Omega_m^{+-} along the kernel direction;
/// the projection of (r_{1,1}, r_{2,1}) on the unit kernel generator is pinned to s.
VStateBranch continue_doubly(const PatchEvaluator& ev, double a1, double a2, int m, Branch branch,
                             const BranchOptions& options);

/// sup |F| (or max over both G components) on a theta grid refined by `multiplier`.
double residual_report(const PatchEvaluator& ev, const BranchStep& step, std::size_t multiplier);

}  // namespace lakevort
