#pragma once

#include <stdexcept>
#include <string>

namespace lakevort {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input: profile parameters, grids, tolerances, geometry.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine failed to reach its target (ODE, Newton, linear solve).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Two independent routes to the same quantity disagree beyond tolerance.
class CrossCheckError : public Error {
 public:
  using Error::Error;
};

/// The annulus discriminant is not strictly positive.
class DegenerateSpectrumError : public Error {
 public:
  using Error::Error;
};

/// A contour stopped being a graph over the angle, or two contours touched.
class GeometryError : public Error {
 public:
  using Error::Error;
};

}  // namespace lakevort
