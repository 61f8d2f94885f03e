#include "lqpadmm/lqp.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "lqpadmm/numeric.hpp"

namespace lqpadmm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kNewtonCap = 100;
constexpr double kArmijoSlope = 1e-4;
constexpr int kArmijoCap = 60;
constexpr double kBoundaryFraction = 0.01;

}  // namespace

void LqpTerm::validate() const {
  if (!(mu > 0.0 && mu < 1.0)) {
    throw ParameterError("lqp term: 0 < mu < 1 is required");
  }
  if (!(weight_r > 0.0)) {
    throw ParameterError("lqp term: weight r must be positive");
  }
  if (anchor_z.size() == 0 || (anchor_z.array() <= 0.0).any()) {
    throw DomainError("lqp term: anchor must be strictly positive");
  }
}

void SubproblemInstance::validate() const {
  lqp.validate();
  const Index m = lqp.anchor_z.size();
  if (quad_matrix.rows() != m || quad_matrix.cols() != m ||
      linear_term.size() != m) {
    std::ostringstream os;
    os << "subproblem: quadratic is " << quad_matrix.rows() << "x"
       << quad_matrix.cols() << ", linear has length " << linear_term.size()
       << ", anchor has length " << m;
    throw DimensionError(os.str());
  }
  const double scale = 1.0 + quad_matrix.cwiseAbs().maxCoeff();
  if ((quad_matrix - quad_matrix.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * scale) {
    throw DimensionError("subproblem: quadratic matrix is not symmetric");
  }
  // PSD check: a slightly ridged copy must factor.
  Matrix shifted = quad_matrix;
  shifted.diagonal().array() += 1e-10 * scale;
  try {
    numeric::Cholesky chol(shifted);
  } catch (const FactorizationError& e) {
    std::ostringstream os;
    os << "subproblem: quadratic matrix is not positive semidefinite ("
       << e.what() << ")";
    throw DomainError(os.str());
  }
}

double lqp_value(const LqpTerm& term, const Vector& v) {
  if (v.size() != term.anchor_z.size()) {
    throw DimensionError("lqp value: argument/anchor length mismatch");
  }
  if ((v.array() <= 0.0).any()) return kInf;
  const auto& z = term.anchor_z;
  double total = 0.0;
  for (Index j = 0; j < v.size(); ++j) {
    const double dv = v(j) - z(j);
    total += 0.5 * dv * dv +
             term.mu * (z(j) * z(j) * std::log(z(j) / v(j)) + v(j) * z(j) -
                        z(j) * z(j));
  }
  return total;
}

Vector lqp_gradient(const LqpTerm& term, const Vector& v) {
  if (v.size() != term.anchor_z.size()) {
    throw DimensionError("lqp gradient: argument/anchor length mismatch");
  }
  if ((v.array() <= 0.0).any()) {
    throw DomainError("lqp gradient: argument must be strictly positive");
  }
  const auto& z = term.anchor_z;
  return (v - z).eval() +
         term.mu * (z.array() - z.array().square() / v.array()).matrix();
}

Vector solve_block_subproblem(const SubproblemInstance& inst,
                              const Vector& warm_start, double tol,
                              SubproblemLog* log) {
  inst.validate();
  if (!(tol > 0.0)) {
    throw ParameterError("subproblem: tolerance must be positive");
  }
  if (warm_start.size() != inst.lqp.anchor_z.size()) {
    throw DimensionError("subproblem: warm start length mismatch");
  }
  if ((warm_start.array() <= 0.0).any()) {
    throw DomainError("subproblem: warm start must be strictly positive");
  }

  const Matrix& quad = inst.quad_matrix;
  const Vector& lin = inst.linear_term;
  const LqpTerm& lqp = inst.lqp;
  const double r = lqp.weight_r;
  const Index m = warm_start.size();

  const auto objective = [&](const Vector& v) {
    return 0.5 * v.dot(quad * v) + lin.dot(v) + r * lqp_value(lqp, v);
  };
  const auto gradient = [&](const Vector& v) -> Vector {
    return quad * v + lin + r * lqp_gradient(lqp, v);
  };

  Vector x = warm_start;
  double fx = objective(x);
  if (log != nullptr) {
    log->newton_iterations = 0;
    log->objective_trajectory = {fx};
  }

  // The gradient is a sum of terms that cancel near the optimum, so its
  // achievable norm is bounded below by roundoff in those terms. Stopping at
  // max(tol, floor) keeps over-tight tolerances from spinning on the cap.
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  const auto gradient_floor = [&](const Vector& v) {
    return 32.0 * kEps *
           ((quad * v).norm() + lin.norm() +
            r * ((v - lqp.anchor_z).norm() +
                 lqp.mu * (lqp.anchor_z.norm() +
                           (lqp.anchor_z.array().square() / v.array())
                               .matrix()
                               .norm())));
  };

  double opt_norm = 0.0;
  for (int it = 0; it < kNewtonCap; ++it) {
    const Vector g = gradient(x);
    // Projected optimality measure: a coordinate is converged either when
    // its gradient vanishes or when it sits against the boundary with a
    // gradient pushing further down.
    opt_norm = (x - (x - g).cwiseMax(0.0)).norm();
    if (opt_norm <= std::max(tol, gradient_floor(x))) return x;

    Matrix hess = quad;
    for (Index j = 0; j < m; ++j) {
      // The barrier curvature mu*(z/x)^2 can overflow when a component has
      // collapsed far below its anchor; the clamp freezes such components
      // without disturbing the rest of the Newton system.
      const double ratio = lqp.anchor_z(j) / x(j);
      const double barrier =
          ratio < 1e60 ? lqp.mu * ratio * ratio : lqp.mu * 1e120;
      hess(j, j) += r * (1.0 + barrier);
    }
    Vector dir = numeric::Cholesky(hess).solve(-g);

    // Per-coordinate fraction-to-boundary: one accepted step may shrink a
    // coordinate by at most a factor of kBoundaryFraction, and coordinates
    // heading to zero must not stall the others.
    bool clipped = false;
    for (Index j = 0; j < m; ++j) {
      const double lowest = -(1.0 - kBoundaryFraction) * x(j);
      if (dir(j) < lowest) {
        dir(j) = lowest;
        clipped = true;
      }
    }
    double slope = g.dot(dir);
    if (clipped && slope >= 0.0) {
      // Clipping can spoil the Newton direction; the clipped steepest
      // descent direction always makes negative slope.
      for (Index j = 0; j < m; ++j) {
        dir(j) = std::max(-g(j), -(1.0 - kBoundaryFraction) * x(j));
      }
      slope = g.dot(dir);
    }
    if (slope >= 0.0) return x;

    double t = 1.0;
    Vector candidate = x + t * dir;
    double fc = objective(candidate);
    int halvings = 0;
    while (fc > fx + kArmijoSlope * t * slope) {
      if (++halvings > kArmijoCap) {
        throw ConvergenceError("subproblem: line search failed", opt_norm);
      }
      t *= 0.5;
      candidate = x + t * dir;
      fc = objective(candidate);
    }
    bool keep_iterating = fc < fx;
    if (!keep_iterating) {
      // The objective has hit its rounding floor, but the gradient resolves
      // several orders of magnitude finer: accept the full Newton step while
      // it still halves the optimality measure, and stop once even that
      // stalls.
      const Vector full = x + dir;
      const Vector full_grad = gradient(full);
      const double full_opt = (full - (full - full_grad).cwiseMax(0.0)).norm();
      if (full_opt < 0.5 * opt_norm) {
        candidate = full;
        fc = objective(full);
        keep_iterating = true;
      }
    }
    x = candidate;
    fx = fc;
    if (log != nullptr) {
      ++log->newton_iterations;
      log->objective_trajectory.push_back(fx);
    }
    // Neither the objective nor the optimality measure can improve further.
    if (!keep_iterating) return x;
  }
  std::ostringstream os;
  os << "subproblem: Newton iteration cap reached (optimality measure "
     << opt_norm << ", tolerance " << tol << ")";
  throw ConvergenceError(os.str(), opt_norm);
}

}  // namespace lqpadmm
