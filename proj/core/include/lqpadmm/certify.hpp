#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lqpadmm/problem.hpp"
#include "lqpadmm/solver.hpp"

namespace lqpadmm::certify {

/// Result of the dual stepsize admissibility test. `failure` quotes the
/// first violated inequality when `ok` is false.
struct StepsizeCheck {
  bool ok = false;
  std::string failure;
};

/// The admissible dual stepsize region:
///   1 > alpha > -1,  alpha + tau > 0,
///   1 + alpha + tau - alpha*tau - alpha^2 - tau^2 > 0.
StepsizeCheck check_stepsize_region(double alpha, double tau);

enum class Variant { kPlain, kLinearized };

/// The structural matrices of the prediction-correction form of one outer
/// iteration, on the stacked space ordered (x_1, ..., x_p, y, lambda):
/// the prediction weighting Q and proximal shift N, the correction map M,
/// the contraction metric H = Q M^{-1}, and the descent weighting
/// G = Q' + Q - M'HM - 2N.
struct CertificateMatrices {
  Matrix q;
  Matrix m;
  Matrix n;
  Matrix h;
  Matrix g;
  Variant variant = Variant::kPlain;
  Index x_dim = 0;
  Index y_dim = 0;
  Index lambda_dim = 0;
};

/// Builds the certificate matrices for a problem/parameter pair. For the
/// linearized variant, sigma supplies the tail proximal weight whose
/// offset D = sigma*I - beta*B'B enters Q, H, N and G.
CertificateMatrices assemble(const ProblemSpec& spec,
                             const SolverParams& params,
                             Variant variant = Variant::kPlain,
                             double sigma = 0.0);

/// Smallest eigenvalue of H. Throws CertificationError if the parameters
/// satisfy the sufficient positivity conditions (r_i >= gamma*beta*
/// ||A_i'A_i||, gamma > (p-1)/(1+mu), alpha < 1, alpha + tau > 0) yet the
/// computed eigenvalue fails to be positive.
double verify_h_positive_definite(const CertificateMatrices& mats,
                                  const ProblemSpec& spec,
                                  const SolverParams& params);

/// Constants of the per-iteration descent lower bound:
///   xi1 = beta * (gamma*(1 - mu) - (p - 1))
///   xi2 = beta * (2 - alpha - tau - (1 - tau)^2 / (1 + alpha))
///   xi3 = beta * (1 - tau)^2 / (1 + alpha)
struct XiConstants {
  double xi1 = 0.0;
  double xi2 = 0.0;
  double xi3 = 0.0;
};
XiConstants xi_constants(const SolverParams& params, Index p);

/// Per-transition slack of the contraction certificate
///   ||w^{k+1}-w*||_H^2 + xi3 ||E^{k+1}||^2
///     <= ||w^k-w*||_H^2 + xi3 ||E^k||^2
///        - xi1 sum_i ||A_i(x_i^{k+1}-x_i^k)||^2 - xi2 ||E^{k+1}||^2,
/// returned as right-minus-left (nonnegative when the certificate holds)
/// for every recorded transition.
std::vector<double> check_contraction(const ProblemSpec& spec,
                                      const std::vector<IterateState>& states,
                                      const CertificateMatrices& mats,
                                      const XiConstants& xi,
                                      const WPoint& w_star);

/// Ergodic-rate check over the window [kappa, kappa+t] plus the derived
/// accuracy bounds at the averaged point, with `w_ref` standing in for the
/// solution. Throws CertificationError when lhs > rhs + 1e-8.
struct ErgodicBound {
  double lhs = 0.0;
  double rhs = 0.0;
  double feas_norm = 0.0;        // ||A x_T + B y_T - b||
  double feas_bound = 0.0;
  double objective_gap = 0.0;    // |Theta(u_T) - Theta(u_ref)|
  double objective_bound = 0.0;
};
ErgodicBound check_ergodic_bound(const ProblemSpec& spec,
                                 const std::vector<IterateState>& states,
                                 const CertificateMatrices& mats,
                                 const XiConstants& xi, int kappa, int t,
                                 const WPoint& w_ref);

/// The monotone operator of the saddle formulation,
///   J(w) = (-A_1' lambda, ..., -A_p' lambda, -B' lambda, Ax + By - b),
/// stacked like stack_point.
Vector vi_operator(const ProblemSpec& spec, const WPoint& w);

/// Largest violation, over the probe set, of the variational
/// characterization of a solution at w:
///   max over probes of  max(0, -[Theta(probe) - Theta(w)
///                               + <probe - w, J(probe)>]).
/// Near zero iff w solves the problem.
double vi_residual(const ProblemSpec& spec, const WPoint& w,
                   const std::vector<WPoint>& probes);

/// Random in-domain probe points: lognormal block values, domain-projected
/// Gaussian tail values, Gaussian multipliers.
std::vector<WPoint> sample_feasible_probes(const ProblemSpec& spec, int count,
                                           std::uint64_t seed);

/// Summary emitted next to a solve by the command line front end.
struct CertificateReport {
  double h_min_eig = 0.0;
  XiConstants xi;
  std::optional<double> contraction_min_slack;
  std::optional<std::pair<double, double>> ergodic_lhs_rhs;
  bool k_membership = false;
};

}  // namespace lqpadmm::certify
