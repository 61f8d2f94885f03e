#include "lqpadmm/numeric.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <random>
#include <sstream>

namespace lqpadmm::numeric {

namespace {

void require_square_symmetric(const Matrix& a, const char* who) {
  if (a.rows() != a.cols()) {
    std::ostringstream os;
    os << who << ": matrix is " << a.rows() << "x" << a.cols()
       << ", expected square";
    throw DimensionError(os.str());
  }
  const double scale = 1.0 + a.cwiseAbs().maxCoeff();
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (asym > Tol::symmetry * scale) {
    std::ostringstream os;
    os << who << ": matrix is not symmetric (max asymmetry " << asym << ")";
    throw DimensionError(os.str());
  }
}

}  // namespace

Cholesky::Cholesky(const Matrix& a) {
  require_square_symmetric(a, "cholesky");
  const Index n = a.rows();
  l_ = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    double d = a(j, j);
    for (Index k = 0; k < j; ++k) d -= l_(j, k) * l_(j, k);
    if (d <= 0.0 || !std::isfinite(d)) {
      std::ostringstream os;
      os << "cholesky: nonpositive pivot " << d << " at index " << j;
      throw FactorizationError(os.str(), j);
    }
    l_(j, j) = std::sqrt(d);
    for (Index i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (Index k = 0; k < j; ++k) s -= l_(i, k) * l_(j, k);
      l_(i, j) = s / l_(j, j);
    }
  }
}

Vector Cholesky::solve(const Vector& rhs) const {
  const Index n = l_.rows();
  if (rhs.size() != n) {
    std::ostringstream os;
    os << "cholesky solve: rhs has length " << rhs.size() << ", expected "
       << n;
    throw DimensionError(os.str());
  }
  Vector y(n);
  for (Index i = 0; i < n; ++i) {
    double s = rhs(i);
    for (Index k = 0; k < i; ++k) s -= l_(i, k) * y(k);
    y(i) = s / l_(i, i);
  }
  Vector x(n);
  for (Index i = n - 1; i >= 0; --i) {
    double s = y(i);
    for (Index k = i + 1; k < n; ++k) s -= l_(k, i) * x(k);
    x(i) = s / l_(i, i);
  }
  return x;
}

Vector cholesky_solve(const Matrix& a, const Vector& rhs) {
  return Cholesky(a).solve(rhs);
}

double spectral_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  if (a.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  const Matrix s = a.transpose() * a;
  const Index n = s.rows();

  std::mt19937_64 rng(0x5eed5eedULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = normal(rng);
  v.normalize();

  double rho = v.dot(s * v);
  for (int it = 0; it < Tol::power_iteration_cap; ++it) {
    Vector w = s * v;
    const double wn = w.norm();
    if (wn == 0.0) {
      // v landed in the nullspace; re-seed once and keep going.
      for (Index i = 0; i < n; ++i) v(i) = normal(rng);
      v.normalize();
      rho = v.dot(s * v);
      continue;
    }
    v = w / wn;
    const double rho_next = v.dot(s * v);
    if (std::abs(rho_next - rho) <= Tol::power_iteration * std::max(1.0, rho_next)) {
      return std::sqrt(std::max(rho_next, 0.0));
    }
    rho = rho_next;
  }
  throw ConvergenceError("power iteration did not converge", std::sqrt(std::max(rho, 0.0)));
}

std::pair<double, double> sym_eigen_extremes(const Matrix& a) {
  require_square_symmetric(a, "sym_eigen_extremes");
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  if (es.info() != Eigen::Success) {
    throw ConvergenceError("symmetric eigensolver failed", 0.0);
  }
  const auto& ev = es.eigenvalues();
  return {ev(0), ev(ev.size() - 1)};
}

Matrix symmetrized(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw DimensionError("symmetrized: matrix is not square");
  }
  const double scale = 1.0 + a.cwiseAbs().maxCoeff();
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (asym > Tol::asymmetry_guard * scale) {
    std::ostringstream os;
    os << "symmetrized: asymmetry " << asym
       << " exceeds guard; matrix is structurally asymmetric";
    throw CertificationError(os.str());
  }
  return 0.5 * (a + a.transpose());
}

double scaled_min_singular_ratio(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Matrix scaled = a;
  for (Index j = 0; j < scaled.cols(); ++j) {
    const double cn = scaled.col(j).norm();
    if (cn == 0.0) return 0.0;
    scaled.col(j) /= cn;
  }
  Eigen::JacobiSVD<Matrix> svd(scaled);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  if (smax == 0.0) return 0.0;
  return sv(sv.size() - 1) / smax;
}

}  // namespace lqpadmm::numeric
