#pragma once

#include <Eigen/Dense>
#include <vector>

#include "lakevort/contour.hpp"
#include "lakevort/stream.hpp"

namespace lakevort {

/// Pointwise values of a contour functional with its Fourier projections.
struct FunctionalValues {
  std::vector<double> theta;
  std::vector<double> values;
  std::vector<double> sine;    ///< (2/N) sum F sin(k m theta), k = 1..count (index k-1)
  std::vector<double> cosine;  ///< (2/N) sum F cos(k m theta), k = 0..count (k = 0 uses 1/N)
  double sup_norm = 0.0;
};

/// F(Omega, r)(theta) = Omega r'(theta) + (1/b(R)) d/dtheta psi(R(theta) e^{i theta}).
/// `projections` = 0 selects every resolvable mode; `multiplier` scales the node count.
FunctionalValues functional_F(const PatchEvaluator& ev, double omega, const FourierContour& contour,
                              std::size_t projections = 0, std::size_t multiplier = 1);

struct FunctionalPair {
  FunctionalValues outer;
  FunctionalValues inner;
};

/// G_k = Omega r_k' + (1/b(R_k)) d/dtheta (psi^{D1} - psi^{D2}) on contour k.
FunctionalPair functional_G(const PatchEvaluator& ev, double omega, const FourierContour& outer,
                            const FourierContour& inner, std::size_t projections = 0,
                            std::size_t multiplier = 1);

struct MultiplierRow {
  int n = 0;
  double fd = 0.0;
  double analytic = 0.0;
  double abs_error = 0.0;
  double rel_error = 0.0;
};

/// Central differences of the sin(nm theta) projection of F at r = 0 in the
/// direction cos(nm theta) against -nm (Omega - Q(a,0) + Lambda_{nm}(a,a)).
std::vector<MultiplierRow> multiplier_check(const PatchEvaluator& ev, double a, double omega, int m,
                                            int n_max, double eps);

struct MatrixMultiplierRow {
  int n = 0;
  Eigen::Matrix2d fd;
  Eigen::Matrix2d analytic;
  double rel_error = 0.0;  ///< largest entrywise relative error
};

/// Doubly connected analogue: the 2x2 FD Jacobian of the sin(nm theta)
/// projections of (G1, G2) against -nm M_{nm}(Omega).
std::vector<MatrixMultiplierRow> multiplier_check_doubly(const PatchEvaluator& ev, double a1, double a2,
                                                         double omega, int m, int n_max, double eps);

}  // namespace lakevort
