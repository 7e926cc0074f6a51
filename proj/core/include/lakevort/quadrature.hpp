#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace lakevort {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Returns the n-point Gauss-Legendre rule; rules are cached and thread safe.
const GaussRule& gauss_legendre(std::size_t n);

/// Fixed-order Gauss-Legendre quadrature of f over [lo, hi].
double gauss_integrate(const std::function<double(double)>& f, double lo, double hi,
                       std::size_t order);

/// Adaptive Gauss-Kronrod quadrature of f over [lo, hi], split at the given
/// interior breakpoints where f may lose smoothness.
double adaptive_integrate(const std::function<double(double)>& f, double lo, double hi,
                          double tol, std::span<const double> breakpoints = {});

/// Gauss-Legendre quadrature with the substitution x = lo + (hi-lo)(1-cos t)/2,
/// which absorbs square-root endpoint behaviour.  Nodes and weights are
/// appended to the output vectors.
void append_cosine_rule(double lo, double hi, std::size_t order, std::vector<double>& nodes,
                        std::vector<double>& weights);

}  // namespace lakevort
