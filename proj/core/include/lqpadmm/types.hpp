#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace lqpadmm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Base class for everything thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not line up; the message names the offending piece.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A value left the domain where an operation is defined (e.g. a
/// nonpositive component handed to an interior-point quantity).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A parameter violates its admissibility condition; the message quotes
/// the failing inequality.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A structurally unsupported problem/algorithm combination.
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

/// A Cholesky pivot failed; carries the zero-based pivot index.
class FactorizationError : public Error {
 public:
  FactorizationError(const std::string& msg, Index pivot)
      : Error(msg), pivot_index(pivot) {}
  Index pivot_index;
};

/// An iterative routine hit its cap; carries the last residual it saw.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& msg, double residual)
      : Error(msg), last_residual(residual) {}
  double last_residual;
};

/// A runtime certificate that should hold under the checked conditions
/// failed to verify.
class CertificationError : public Error {
 public:
  using Error::Error;
};

}  // namespace lqpadmm
