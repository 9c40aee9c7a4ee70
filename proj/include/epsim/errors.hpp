#pragma once

#include <stdexcept>
#include <string>

namespace epsim {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the documented domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A configured budget (grid centers, OT batch, path length) would be exceeded.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure: non-PSD covariance, quadrature failure, divergent integral.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Mismatched vector or matrix shapes.
class ShapeError : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Regression with degenerate abscissae or ordinates.
class FitError : public Error {
 public:
  using Error::Error;
};

class ScheduleError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace epsim
