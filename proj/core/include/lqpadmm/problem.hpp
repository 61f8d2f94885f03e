#pragma once

#include <cstdint>
#include <vector>

#include "lqpadmm/types.hpp"

namespace lqpadmm {

/// One separable block objective f_i from the supported catalog. All
/// catalog members are convex and finite on the nonnegative orthant.
struct BlockFunction {
  enum class Kind {
    kLinear,         // f(x) = c'x
    kDiagQuadratic,  // f(x) = (1/2) x'diag(p)x + c'x, p >= 0
    kL1Nonneg,       // f(x) = w*||x||_1 evaluated on x >= 0
  };

  Kind kind = Kind::kLinear;
  Vector c;       // linear coefficient (kLinear, kDiagQuadratic)
  Vector p_diag;  // nonnegative curvature (kDiagQuadratic)
  double weight = 0.0;  // w > 0 (kL1Nonneg)

  static BlockFunction linear(Vector coeff);
  static BlockFunction diag_quadratic(Vector curvature, Vector coeff);
  static BlockFunction l1_nonneg(double weight);

  double value(const Vector& x) const;

  /// Linear part of the quadratic model of f on the open orthant
  /// (kL1Nonneg reduces to a linear function there).
  Vector model_linear(Index dim) const;
  /// Diagonal curvature of the quadratic model (zero except kDiagQuadratic).
  Vector model_quad_diag(Index dim) const;
};

/// Smooth-plus-nonsmooth tail objective in the coupling variable y.
struct TailFunction {
  enum class GKind { kZero, kLinear, kQuadratic };
  enum class HKind { kZero, kL1, kIndicatorBox, kIndicatorNonneg };

  GKind g_kind = GKind::kZero;
  Vector g_c;  // linear coefficient of g (kLinear, kQuadratic)
  Matrix g_p;  // symmetric PSD curvature of g (kQuadratic)

  HKind h_kind = HKind::kZero;
  double h_weight = 0.0;    // kL1
  Vector h_lower, h_upper;  // kIndicatorBox

  /// Gradient Lipschitz constant of g. Derived from the catalog
  /// (largest eigenvalue of g_p for kQuadratic, 0 otherwise).
  double lipschitz_lg = 0.0;

  static TailFunction zero();
  static TailFunction linear_g(Vector coeff);
  static TailFunction quadratic_g(Matrix curvature, Vector coeff);

  TailFunction& with_l1_h(double weight);
  TailFunction& with_box_h(Vector lower, Vector upper);
  TailFunction& with_nonneg_h();

  double g_value(const Vector& y) const;
  Vector g_gradient(const Vector& y) const;
  /// Value of h at y; for indicator kinds returns +inf when y violates the
  /// set by more than feas_tol in any coordinate.
  double h_value(const Vector& y, double feas_tol) const;
};

/// Domain of the y variable handled by the exact tail update.
struct YDomain {
  enum class Kind { kFree, kNonnegOrthant, kBox };

  Kind kind = Kind::kFree;
  Vector lower, upper;  // kBox only

  static YDomain free_space();
  static YDomain nonneg_orthant();
  static YDomain box(Vector lower, Vector upper);

  Vector project(const Vector& y) const;
  bool contains(const Vector& y, double tol) const;
};

struct Block {
  BlockFunction f;
  Matrix a;  // coupling matrix of this block, n x m_i, full column rank
};

/// Immutable description of one separable program
///   min sum_i f_i(x_i) + g(y) + h(y)
///   s.t. sum_i A_i x_i + B y = b,  x_i >= 0,  y in the declared domain.
/// Construction validates every dimension and rank condition and throws a
/// structured error naming the offending piece.
class ProblemSpec {
 public:
  ProblemSpec(std::vector<Block> blocks, TailFunction tail, Matrix b_mat,
              Vector rhs, YDomain y_domain);

  Index num_blocks() const { return static_cast<Index>(blocks_.size()); }
  Index n() const { return rhs_.size(); }            // coupling rows
  Index y_dim() const { return b_mat_.cols(); }
  Index block_dim(Index i) const { return blocks_[static_cast<size_t>(i)].a.cols(); }
  Index x_dim() const;  // sum of block dims

  const std::vector<Block>& blocks() const { return blocks_; }
  const Block& block(Index i) const { return blocks_[static_cast<size_t>(i)]; }
  const TailFunction& tail() const { return tail_; }
  const Matrix& b_mat() const { return b_mat_; }
  const Vector& rhs() const { return rhs_; }
  const YDomain& y_domain() const { return y_domain_; }

  /// sum_i A_i x_i for stacked block values.
  Vector apply_a(const std::vector<Vector>& x) const;

  void check_point_dims(const std::vector<Vector>& x, const Vector& y) const;

 private:
  std::vector<Block> blocks_;
  TailFunction tail_;
  Matrix b_mat_;
  Vector rhs_;
  YDomain y_domain_;
};

/// Objective value sum_i f_i(x_i) + g(y) + h(y). Returns +inf when h is an
/// indicator and y violates it beyond feas_tol.
double evaluate_objective(const ProblemSpec& spec, const std::vector<Vector>& x,
                          const Vector& y, double feas_tol = 1e-8);

/// Equality-constraint residual sum_i A_i x_i + B y - b.
Vector primal_residual(const ProblemSpec& spec, const std::vector<Vector>& x,
                       const Vector& y);

/// Sparse nonnegative signal recovery: p blocks with weighted-l1 objectives
/// plus an l1 tail group, all column groups drawn from one column-normalized
/// standard normal matrix, right-hand side planted as A*x_true with a
/// uniformly selected nonnegative sparse support.
struct SparseSignalInstance {
  ProblemSpec spec;
  std::vector<Vector> planted_blocks;
  Vector planted_y;
};
SparseSignalInstance generate_sparse_signal_instance(Index n_rows,
                                                     Index block_size, Index p,
                                                     double sparsity,
                                                     std::uint64_t seed);

/// Dual of a box-constrained LP  min c'z s.t. Bz = d, l <= z <= u, phrased
/// as a 2-block nonnegative program with a free tail variable:
///   min u'x1 - l'x2 + d'y  s.t.  x1 - x2 + B'y = -c, x1, x2 >= 0.
/// Entries of B and c are standard normal; l < 0 < u with unit-plus-half-
/// normal magnitudes; d is chosen so the primal box LP is feasible.
struct LpBoxDualInstance {
  ProblemSpec spec;
  Matrix lp_b;       // primal constraint matrix B (m x n)
  Vector lp_c;       // primal cost
  Vector lp_d;       // primal right-hand side
  Vector lp_lower;   // box lower bounds
  Vector lp_upper;   // box upper bounds
};
LpBoxDualInstance generate_lp_box_dual_instance(Index m, Index n,
                                                std::uint64_t seed);

}  // namespace lqpadmm
