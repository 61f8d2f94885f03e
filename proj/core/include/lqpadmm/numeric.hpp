#pragma once

#include <utility>

#include "lqpadmm/types.hpp"

namespace lqpadmm::numeric {

/// Central tolerance surface. Every hard-coded numeric threshold used by
/// the library lives here so tests and callers agree on one set of values.
struct Tol {
  /// Max allowed relative asymmetry for matrices required to be symmetric.
  static constexpr double symmetry = 1e-10;
  /// Guard when symmetrizing a matrix that is symmetric only up to roundoff.
  static constexpr double asymmetry_guard = 1e-8;
  /// Relative smallest-singular-value threshold for full-column-rank checks.
  static constexpr double rank = 1e-8;
  /// Relative convergence tolerance for the power iteration.
  static constexpr double power_iteration = 1e-10;
  /// Iteration cap for the power iteration.
  static constexpr int power_iteration_cap = 10000;
  /// Residual quality expected from a well-conditioned dense solve.
  static constexpr double linear_solve = 1e-10;
};

/// Dense lower-triangular Cholesky factor of a symmetric positive definite
/// matrix. Factors once, solves many right-hand sides.
class Cholesky {
 public:
  /// Factors `a`. Throws DimensionError if `a` is not square or not
  /// symmetric to Tol::symmetry, FactorizationError (with the pivot index)
  /// on a nonpositive pivot.
  explicit Cholesky(const Matrix& a);

  Vector solve(const Vector& rhs) const;

  const Matrix& lower() const { return l_; }

 private:
  Matrix l_;
};

/// One-shot solve of a*x = rhs for symmetric positive definite `a`.
Vector cholesky_solve(const Matrix& a, const Vector& rhs);

/// Largest singular value of a general matrix, computed by power iteration
/// on a'*a to Tol::power_iteration relative accuracy. Throws
/// ConvergenceError after Tol::power_iteration_cap steps.
double spectral_norm(const Matrix& a);

/// (smallest, largest) eigenvalue of a symmetric matrix.
std::pair<double, double> sym_eigen_extremes(const Matrix& a);

/// Returns (a + a')/2. Throws CertificationError if the asymmetry exceeds
/// Tol::asymmetry_guard relative to the magnitude of `a`.
Matrix symmetrized(const Matrix& a);

/// Smallest singular value of `a` after scaling every column to unit norm,
/// relative to the largest singular value of the scaled matrix. Returns 0
/// for a matrix with a zero column. Used for full-column-rank checks.
double scaled_min_singular_ratio(const Matrix& a);

}  // namespace lqpadmm::numeric
