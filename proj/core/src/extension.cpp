#include "lqpadmm/extension.hpp"

#include <cmath>
#include <sstream>

#include "engine.hpp"
#include "lqpadmm/numeric.hpp"

namespace lqpadmm {

namespace {

double sigma_floor(const ProblemSpec& spec, double alpha, double beta) {
  const Matrix& b = spec.b_mat();
  const double btb_norm = numeric::spectral_norm(b.transpose() * b);
  return beta * btb_norm +
         (3.0 - alpha) / (1.0 + alpha) * spec.tail().lipschitz_lg;
}

}  // namespace

ExtensionParams default_extension_params(const ProblemSpec& spec, double alpha,
                                         double tau, double beta, double mu) {
  ExtensionParams params;
  params.base = default_params(spec, alpha, tau, beta, mu);
  params.sigma = sigma_floor(spec, alpha, beta);
  validate_extension_params(spec, params);
  return params;
}

void validate_extension_params(const ProblemSpec& spec,
                               const ExtensionParams& params) {
  validate_params(spec, params.base);
  effective_nonsmooth_tail(spec);
  const double floor = sigma_floor(spec, params.base.alpha, params.base.beta);
  if (params.sigma < floor * (1.0 - 1e-12)) {
    std::ostringstream os;
    os << "sigma >= beta*||B'B|| + (3-alpha)/(1+alpha)*L_g is required "
       << "(sigma = " << params.sigma << ", floor = " << floor << ")";
    throw ParameterError(os.str());
  }
}

EffectiveNonsmoothTail effective_nonsmooth_tail(const ProblemSpec& spec) {
  const TailFunction& tail = spec.tail();
  EffectiveNonsmoothTail h;
  if (spec.y_domain().kind == YDomain::Kind::kFree) {
    h.kind = tail.h_kind;
    h.weight = tail.h_weight;
    h.lower = tail.h_lower;
    h.upper = tail.h_upper;
    return h;
  }
  if (tail.h_kind != TailFunction::HKind::kZero) {
    throw ConfigurationError(
        "linearized tail update: a declared nonsmooth tail cannot be "
        "combined with a constrained y domain");
  }
  if (spec.y_domain().kind == YDomain::Kind::kNonnegOrthant) {
    h.kind = TailFunction::HKind::kIndicatorNonneg;
  } else {
    h.kind = TailFunction::HKind::kIndicatorBox;
    h.lower = spec.y_domain().lower;
    h.upper = spec.y_domain().upper;
  }
  return h;
}

Vector prox_point(const ProblemSpec& spec, const ExtensionParams& params,
                  const IterateState& mid) {
  spec.check_point_dims(mid.x, mid.y);
  if (mid.lambda_half.size() != spec.n()) {
    throw DimensionError("prox point: multiplier length mismatch");
  }
  if (!(params.sigma > 0.0)) {
    throw ParameterError("sigma > 0 is required");
  }
  const Matrix& b = spec.b_mat();
  const Vector residual = spec.apply_a(mid.x) + b * mid.y - spec.rhs();
  const Vector bracket = spec.tail().g_gradient(mid.y) -
                         b.transpose() * mid.lambda_half +
                         params.base.beta * (b.transpose() * residual);
  return mid.y - bracket / params.sigma;
}

Vector prox_map(const EffectiveNonsmoothTail& h, double sigma,
                const Vector& candidate) {
  if (!(sigma > 0.0)) throw ParameterError("sigma > 0 is required");
  switch (h.kind) {
    case TailFunction::HKind::kZero:
      return candidate;
    case TailFunction::HKind::kL1: {
      const double threshold = h.weight / sigma;
      Vector out(candidate.size());
      for (Index j = 0; j < candidate.size(); ++j) {
        const double v = candidate(j);
        out(j) = std::copysign(std::max(std::abs(v) - threshold, 0.0), v);
      }
      return out;
    }
    case TailFunction::HKind::kIndicatorBox:
      if (candidate.size() != h.lower.size()) {
        throw DimensionError("prox map: box bound length mismatch");
      }
      return candidate.cwiseMax(h.lower).cwiseMin(h.upper);
    case TailFunction::HKind::kIndicatorNonneg:
      return candidate.cwiseMax(0.0);
  }
  return candidate;
}

IterateState extended_step(const ProblemSpec& spec,
                           const ExtensionParams& params,
                           const IterateState& state) {
  validate_extension_params(spec, params);
  return detail::Stepper(spec, params.base, detail::YMode::kLinearized,
                         params.sigma)
      .advance(state);
}

IterateState default_initial_state_extended(const ProblemSpec& spec,
                                            const ExtensionParams& params) {
  validate_extension_params(spec, params);
  return detail::Stepper(spec, params.base, detail::YMode::kLinearized,
                         params.sigma)
      .initial_state();
}

SolveResult solve_extended(const ProblemSpec& spec,
                           const ExtensionParams& params,
                           std::optional<IterateState> init,
                           const SolveOptions& options) {
  validate_extension_params(spec, params);
  detail::Stepper stepper(spec, params.base, detail::YMode::kLinearized,
                          params.sigma);
  return detail::run_loop(spec, stepper, std::move(init), options);
}

}  // namespace lqpadmm
