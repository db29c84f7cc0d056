#pragma once

#include <stdexcept>
#include <string>

namespace robinlab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid domain, curve, metric or mesh.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The Robin problem is not coercive (q vanishes on the whole boundary and p = 0),
/// or violates its sign / admissibility constraints.
class CoercivityError : public Error {
 public:
  using Error::Error;
};

/// Iterative solver hit its iteration cap.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual, int iterations)
      : Error(what), residual_(residual), iterations_(iterations) {}
  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

/// A nonzero flux produced vanishing Cauchy data.
class UniquenessAlarm : public Error {
 public:
  using Error::Error;
};

/// Unregularized inversion of a numerically rank-deficient forward map.
class IllConditionedError : public Error {
 public:
  using Error::Error;
};

/// u on S lost positivity during a Robin coefficient iteration.
class PositivityError : public Error {
 public:
  using Error::Error;
};

/// The data mismatch stopped decreasing.
class StagnationError : public Error {
 public:
  using Error::Error;
};

/// Configuration file or parameter rejected at load time.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File system failure (missing input, unwritable output).
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace robinlab
