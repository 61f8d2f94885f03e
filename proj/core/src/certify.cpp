#include "lqpadmm/certify.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <sstream>
#include <utility>

#include "lqpadmm/numeric.hpp"

namespace lqpadmm::certify {
namespace {

std::vector<Index> block_offsets(const ProblemSpec& spec) {
  std::vector<Index> off(static_cast<size_t>(spec.num_blocks()));
  Index acc = 0;
  for (Index i = 0; i < spec.num_blocks(); ++i) {
    off[static_cast<size_t>(i)] = acc;
    acc += spec.block_dim(i);
  }
  return off;
}

double lyapunov_distance(const ProblemSpec& spec, const CertificateMatrices& mats,
                         const IterateState& state, const Vector& v_star) {
  const Vector v = stack_point(spec, WPoint{state.x, state.y, state.lambda});
  const Vector diff = v - v_star;
  return diff.dot(mats.h * diff);
}

}  // namespace

StepsizeCheck check_stepsize_region(double alpha, double tau) {
  if (!(alpha > -1.0 && alpha < 1.0)) {
    return {false, "1 > alpha > -1"};
  }
  if (!(alpha + tau > 0.0)) {
    return {false, "alpha + tau > 0"};
  }
  if (!(1.0 + alpha + tau - alpha * tau - alpha * alpha - tau * tau > 0.0)) {
    return {false, "1 + alpha + tau - alpha*tau - alpha^2 - tau^2 > 0"};
  }
  return {true, ""};
}

CertificateMatrices assemble(const ProblemSpec& spec, const SolverParams& params,
                             Variant variant, double sigma) {
  const Index p = spec.num_blocks();
  if (static_cast<Index>(params.r.size()) != p) {
    throw ParameterError("certificate assembly needs one proximal weight per block");
  }
  if (params.beta <= 0.0) {
    throw ParameterError("beta > 0 is required");
  }
  const double alpha = params.alpha;
  const double tau = params.tau;
  const double beta = params.beta;
  if (std::abs(alpha + tau) < 1e-12) {
    throw ParameterError("correction map is singular at alpha + tau = 0");
  }

  const Index xd = spec.x_dim();
  const Index d = spec.y_dim();
  const Index nn = spec.n();
  const Index total = xd + d + nn;
  const Index yo = xd;
  const Index lo = xd + d;
  const Matrix& bmat = spec.b_mat();
  const Matrix btb = bmat.transpose() * bmat;
  const auto off = block_offsets(spec);

  CertificateMatrices out;
  out.variant = variant;
  out.x_dim = xd;
  out.y_dim = d;
  out.lambda_dim = nn;

  Matrix q = Matrix::Zero(total, total);
  for (Index i = 0; i < p; ++i) {
    const Index oi = off[static_cast<size_t>(i)];
    const Index di = spec.block_dim(i);
    q.block(oi, oi, di, di) =
        (1.0 + params.mu) * params.r[static_cast<size_t>(i)] * Matrix::Identity(di, di);
    for (Index j = 0; j < p; ++j) {
      if (j == i) continue;
      q.block(oi, off[static_cast<size_t>(j)], di, spec.block_dim(j)) =
          -beta * (spec.block(i).a.transpose() * spec.block(j).a);
    }
  }
  Matrix q_yy = beta * btb;
  if (variant == Variant::kLinearized) {
    const Matrix d_mat = sigma * Matrix::Identity(d, d) - beta * btb;
    if (numeric::sym_eigen_extremes(d_mat).first < -1e-8 * (1.0 + std::abs(sigma))) {
      throw ParameterError(
          "sigma >= beta*||B'B|| is required: the tail proximal offset is indefinite");
    }
    q_yy += d_mat;
  }
  q.block(yo, yo, d, d) = q_yy;
  q.block(yo, lo, d, nn) = -alpha * bmat.transpose();
  q.block(lo, yo, nn, d) = -bmat;
  q.block(lo, lo, nn, nn) = (1.0 / beta) * Matrix::Identity(nn, nn);
  out.q = q;

  Matrix m = Matrix::Identity(total, total);
  m.block(lo, yo, nn, d) = -tau * beta * bmat;
  m.block(lo, lo, nn, nn) = (alpha + tau) * Matrix::Identity(nn, nn);
  out.m = m;

  Matrix nmat = Matrix::Zero(total, total);
  for (Index i = 0; i < p; ++i) {
    const Index di = spec.block_dim(i);
    nmat.block(off[static_cast<size_t>(i)], off[static_cast<size_t>(i)], di, di) =
        params.mu * params.r[static_cast<size_t>(i)] * Matrix::Identity(di, di);
  }
  if (variant == Variant::kLinearized) {
    nmat.block(yo, yo, d, d) =
        0.5 * spec.tail().lipschitz_lg * Matrix::Identity(d, d);
  }
  out.n = nmat;

  Matrix minv = Matrix::Identity(total, total);
  minv.block(lo, yo, nn, d) = (tau * beta / (alpha + tau)) * bmat;
  minv.block(lo, lo, nn, nn) = (1.0 / (alpha + tau)) * Matrix::Identity(nn, nn);

  out.h = numeric::symmetrized(q * minv);
  out.g = numeric::symmetrized(q.transpose() + q - m.transpose() * out.h * m -
                               2.0 * nmat);
  return out;
}

double verify_h_positive_definite(const CertificateMatrices& mats,
                                  const ProblemSpec& spec,
                                  const SolverParams& params) {
  const double lam_min = numeric::sym_eigen_extremes(mats.h).first;

  const Index p = spec.num_blocks();
  bool sufficient = params.alpha > -1.0 && params.alpha < 1.0 &&
                    params.alpha + params.tau > 0.0 &&
                    params.gamma * (1.0 + params.mu) > static_cast<double>(p - 1) &&
                    numeric::scaled_min_singular_ratio(spec.b_mat()) >
                        numeric::Tol::rank;
  if (sufficient) {
    for (Index i = 0; i < p; ++i) {
      const double floor_i =
          params.gamma * params.beta *
          numeric::spectral_norm(spec.block(i).a.transpose() * spec.block(i).a);
      if (params.r[static_cast<size_t>(i)] < floor_i * (1.0 - 1e-12)) {
        sufficient = false;
        break;
      }
    }
  }
  if (sufficient && lam_min <= 0.0) {
    std::ostringstream msg;
    msg << "contraction metric lost positive definiteness: smallest eigenvalue "
        << lam_min << " under parameters that guarantee it";
    throw CertificationError(msg.str());
  }
  return lam_min;
}

XiConstants xi_constants(const SolverParams& params, Index p) {
  const StepsizeCheck region = check_stepsize_region(params.alpha, params.tau);
  if (!region.ok) {
    throw ParameterError("stepsize pair outside the admissible region: violates " +
                         region.failure);
  }
  const double one_plus_alpha = 1.0 + params.alpha;
  const double sq = (1.0 - params.tau) * (1.0 - params.tau);
  XiConstants out;
  out.xi1 = params.beta *
            (params.gamma * (1.0 - params.mu) - static_cast<double>(p - 1));
  out.xi2 = params.beta *
            (2.0 - params.alpha - params.tau - sq / one_plus_alpha);
  out.xi3 = params.beta * sq / one_plus_alpha;
  return out;
}

std::vector<double> check_contraction(const ProblemSpec& spec,
                                      const std::vector<IterateState>& states,
                                      const CertificateMatrices& mats,
                                      const XiConstants& xi,
                                      const WPoint& w_star) {
  std::vector<double> slack;
  if (states.size() < 2) return slack;
  slack.reserve(states.size() - 1);

  const Vector v_star = stack_point(spec, w_star);
  double dist_prev = lyapunov_distance(spec, mats, states.front(), v_star);
  double feas_prev = primal_residual(spec, states.front().x, states.front().y).norm();
  for (size_t k = 1; k < states.size(); ++k) {
    const double dist_next = lyapunov_distance(spec, mats, states[k], v_star);
    const double feas_next = primal_residual(spec, states[k].x, states[k].y).norm();
    double move_sq = 0.0;
    for (Index i = 0; i < spec.num_blocks(); ++i) {
      const auto bi = static_cast<size_t>(i);
      move_sq += (spec.block(i).a * (states[k].x[bi] - states[k - 1].x[bi]))
                     .squaredNorm();
    }
    slack.push_back(dist_prev + xi.xi3 * feas_prev * feas_prev -
                    (dist_next + xi.xi3 * feas_next * feas_next) -
                    xi.xi1 * move_sq - xi.xi2 * feas_next * feas_next);
    dist_prev = dist_next;
    feas_prev = feas_next;
  }
  return slack;
}

ErgodicBound check_ergodic_bound(const ProblemSpec& spec,
                                 const std::vector<IterateState>& states,
                                 const CertificateMatrices& mats,
                                 const XiConstants& xi, int kappa, int t,
                                 const WPoint& w_ref) {
  if (kappa < 0 || t < 0 ||
      static_cast<size_t>(kappa) + static_cast<size_t>(t) + 1 >= states.size()) {
    throw ParameterError("ergodic window [kappa, kappa+t] exceeds the recorded run");
  }

  const WPoint w_avg = ergodic_average(spec, states, kappa, t);
  const Vector v_avg = stack_point(spec, w_avg);
  const Vector v_ref = stack_point(spec, w_ref);
  const double theta_avg = evaluate_objective(spec, w_avg.x, w_avg.y);
  const double theta_ref = evaluate_objective(spec, w_ref.x, w_ref.y);

  ErgodicBound out;
  out.lhs = theta_avg - theta_ref + (v_avg - v_ref).dot(vi_operator(spec, w_ref));

  const IterateState& anchor = states[static_cast<size_t>(kappa)];
  const Vector v_anchor = stack_point(spec, WPoint{anchor.x, anchor.y, anchor.lambda});
  const double feas_anchor = primal_residual(spec, anchor.x, anchor.y).norm();
  const Vector diff = v_ref - v_anchor;
  const double denom = 2.0 * (1.0 + static_cast<double>(t));
  out.rhs = (diff.dot(mats.h * diff) + xi.xi3 * feas_anchor * feas_anchor) / denom;
  if (out.lhs > out.rhs + 1e-8) {
    std::ostringstream msg;
    msg << "ergodic certificate violated: " << out.lhs << " > " << out.rhs;
    throw CertificationError(msg.str());
  }

  // Accuracy bounds at the averaged point, from the worst case of the same
  // certificate over the multiplier ball ||lambda|| <= 2*||lambda_ref|| + 1.
  // The quadratic in lambda has an identity-scaled lambda block in H, so the
  // maximum over the ball sits at the boundary point along the linear term.
  const Index nn = spec.n();
  const double ball = 2.0 * w_ref.lambda.norm() + 1.0;
  Vector v0 = diff;
  v0.tail(nn) = -anchor.lambda;
  const Vector b_lin = (mats.h * v0).tail(nn);
  Vector lam_hat = Vector::Zero(nn);
  const double b_norm = b_lin.norm();
  if (b_norm > 0.0) {
    lam_hat = (ball / b_norm) * b_lin;
  } else if (nn > 0) {
    lam_hat(0) = ball;
  }
  Vector v_hat = v0;
  v_hat.tail(nn) += lam_hat;
  const double delta =
      v_hat.dot(mats.h * v_hat) + xi.xi3 * feas_anchor * feas_anchor;

  out.feas_norm = primal_residual(spec, w_avg.x, w_avg.y).norm();
  out.feas_bound = delta / (denom * (w_ref.lambda.norm() + 1.0));
  out.objective_gap = std::abs(theta_avg - theta_ref);
  out.objective_bound = delta / denom;
  return out;
}

Vector vi_operator(const ProblemSpec& spec, const WPoint& w) {
  spec.check_point_dims(w.x, w.y);
  if (w.lambda.size() != spec.n()) {
    throw DimensionError("multiplier length does not match the coupling rows");
  }
  Vector out(spec.x_dim() + spec.y_dim() + spec.n());
  Index pos = 0;
  for (Index i = 0; i < spec.num_blocks(); ++i) {
    out.segment(pos, spec.block_dim(i)) = -spec.block(i).a.transpose() * w.lambda;
    pos += spec.block_dim(i);
  }
  out.segment(pos, spec.y_dim()) = -spec.b_mat().transpose() * w.lambda;
  pos += spec.y_dim();
  out.segment(pos, spec.n()) = primal_residual(spec, w.x, w.y);
  return out;
}

double vi_residual(const ProblemSpec& spec, const WPoint& w,
                   const std::vector<WPoint>& probes) {
  const double theta_w = evaluate_objective(spec, w.x, w.y);
  const Vector v_w = stack_point(spec, w);
  double worst = 0.0;
  for (const WPoint& probe : probes) {
    const double theta_p = evaluate_objective(spec, probe.x, probe.y);
    const Vector v_p = stack_point(spec, probe);
    const double value =
        theta_p - theta_w + (v_p - v_w).dot(vi_operator(spec, probe));
    worst = std::max(worst, std::max(0.0, -value));
  }
  return worst;
}

std::vector<WPoint> sample_feasible_probes(const ProblemSpec& spec, int count,
                                           std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<WPoint> probes;
  probes.reserve(static_cast<size_t>(std::max(count, 0)));
  for (int s = 0; s < count; ++s) {
    WPoint w;
    w.x.resize(static_cast<size_t>(spec.num_blocks()));
    for (Index i = 0; i < spec.num_blocks(); ++i) {
      Vector xi(spec.block_dim(i));
      for (Index j = 0; j < xi.size(); ++j) xi(j) = std::exp(normal(rng));
      w.x[static_cast<size_t>(i)] = std::move(xi);
    }
    Vector y(spec.y_dim());
    for (Index j = 0; j < y.size(); ++j) y(j) = normal(rng);
    y = spec.y_domain().project(y);
    const TailFunction& tail = spec.tail();
    if (tail.h_kind == TailFunction::HKind::kIndicatorNonneg) {
      y = y.cwiseMax(0.0);
    } else if (tail.h_kind == TailFunction::HKind::kIndicatorBox) {
      y = y.cwiseMax(tail.h_lower).cwiseMin(tail.h_upper);
    }
    w.y = std::move(y);
    Vector lam(spec.n());
    for (Index j = 0; j < lam.size(); ++j) lam(j) = normal(rng);
    w.lambda = std::move(lam);
    probes.push_back(std::move(w));
  }
  return probes;
}

}  // namespace lqpadmm::certify
