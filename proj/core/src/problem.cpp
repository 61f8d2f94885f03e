#include "lqpadmm/problem.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "lqpadmm/numeric.hpp"

namespace lqpadmm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_len(const Vector& v, Index len, const char* what) {
  if (v.size() != len) {
    std::ostringstream os;
    os << what << " has length " << v.size() << ", expected " << len;
    throw DimensionError(os.str());
  }
}

}  // namespace

BlockFunction BlockFunction::linear(Vector coeff) {
  BlockFunction f;
  f.kind = Kind::kLinear;
  f.c = std::move(coeff);
  return f;
}

BlockFunction BlockFunction::diag_quadratic(Vector curvature, Vector coeff) {
  if (curvature.size() != coeff.size()) {
    throw DimensionError("diag_quadratic: curvature/coefficient length mismatch");
  }
  if (curvature.size() > 0 && curvature.minCoeff() < 0.0) {
    throw DomainError("diag_quadratic: negative curvature entry");
  }
  BlockFunction f;
  f.kind = Kind::kDiagQuadratic;
  f.p_diag = std::move(curvature);
  f.c = std::move(coeff);
  return f;
}

BlockFunction BlockFunction::l1_nonneg(double weight) {
  if (!(weight > 0.0)) {
    throw DomainError("l1_nonneg: weight must be positive");
  }
  BlockFunction f;
  f.kind = Kind::kL1Nonneg;
  f.weight = weight;
  return f;
}

double BlockFunction::value(const Vector& x) const {
  switch (kind) {
    case Kind::kLinear:
      require_len(x, c.size(), "block argument");
      return c.dot(x);
    case Kind::kDiagQuadratic:
      require_len(x, c.size(), "block argument");
      return 0.5 * x.dot(p_diag.cwiseProduct(x)) + c.dot(x);
    case Kind::kL1Nonneg:
      return weight * x.lpNorm<1>();
  }
  return 0.0;
}

Vector BlockFunction::model_linear(Index dim) const {
  switch (kind) {
    case Kind::kLinear:
    case Kind::kDiagQuadratic:
      return c;
    case Kind::kL1Nonneg:
      return Vector::Constant(dim, weight);
  }
  return Vector::Zero(dim);
}

Vector BlockFunction::model_quad_diag(Index dim) const {
  if (kind == Kind::kDiagQuadratic) return p_diag;
  return Vector::Zero(dim);
}

TailFunction TailFunction::zero() { return TailFunction{}; }

TailFunction TailFunction::linear_g(Vector coeff) {
  TailFunction t;
  t.g_kind = GKind::kLinear;
  t.g_c = std::move(coeff);
  return t;
}

TailFunction TailFunction::quadratic_g(Matrix curvature, Vector coeff) {
  if (curvature.rows() != curvature.cols() ||
      curvature.rows() != coeff.size()) {
    throw DimensionError("quadratic_g: curvature/coefficient shape mismatch");
  }
  const double scale = 1.0 + curvature.cwiseAbs().maxCoeff();
  if ((curvature - curvature.transpose()).cwiseAbs().maxCoeff() >
      numeric::Tol::symmetry * scale) {
    throw DomainError("quadratic_g: curvature matrix is not symmetric");
  }
  const auto [emin, emax] = numeric::sym_eigen_extremes(curvature);
  if (emin < -numeric::Tol::symmetry * scale) {
    throw DomainError("quadratic_g: curvature matrix is not positive semidefinite");
  }
  TailFunction t;
  t.g_kind = GKind::kQuadratic;
  t.g_p = std::move(curvature);
  t.g_c = std::move(coeff);
  t.lipschitz_lg = std::max(emax, 0.0);
  return t;
}

TailFunction& TailFunction::with_l1_h(double weight) {
  if (!(weight > 0.0)) throw DomainError("l1 tail: weight must be positive");
  h_kind = HKind::kL1;
  h_weight = weight;
  return *this;
}

TailFunction& TailFunction::with_box_h(Vector lower, Vector upper) {
  if (lower.size() != upper.size()) {
    throw DimensionError("box tail: bound length mismatch");
  }
  if (((upper - lower).array() < 0.0).any()) {
    throw DomainError("box tail: lower bound exceeds upper bound");
  }
  h_kind = HKind::kIndicatorBox;
  h_lower = std::move(lower);
  h_upper = std::move(upper);
  return *this;
}

TailFunction& TailFunction::with_nonneg_h() {
  h_kind = HKind::kIndicatorNonneg;
  return *this;
}

double TailFunction::g_value(const Vector& y) const {
  switch (g_kind) {
    case GKind::kZero:
      return 0.0;
    case GKind::kLinear:
      require_len(y, g_c.size(), "tail argument");
      return g_c.dot(y);
    case GKind::kQuadratic:
      require_len(y, g_c.size(), "tail argument");
      return 0.5 * y.dot(g_p * y) + g_c.dot(y);
  }
  return 0.0;
}

Vector TailFunction::g_gradient(const Vector& y) const {
  switch (g_kind) {
    case GKind::kZero:
      return Vector::Zero(y.size());
    case GKind::kLinear:
      require_len(y, g_c.size(), "tail argument");
      return g_c;
    case GKind::kQuadratic:
      require_len(y, g_c.size(), "tail argument");
      return g_p * y + g_c;
  }
  return Vector::Zero(y.size());
}

double TailFunction::h_value(const Vector& y, double feas_tol) const {
  switch (h_kind) {
    case HKind::kZero:
      return 0.0;
    case HKind::kL1:
      return h_weight * y.lpNorm<1>();
    case HKind::kIndicatorBox:
      require_len(y, h_lower.size(), "tail argument");
      if (((y - h_upper).array() > feas_tol).any() ||
          ((h_lower - y).array() > feas_tol).any()) {
        return kInf;
      }
      return 0.0;
    case HKind::kIndicatorNonneg:
      if ((y.array() < -feas_tol).any()) return kInf;
      return 0.0;
  }
  return 0.0;
}

YDomain YDomain::free_space() { return YDomain{}; }

YDomain YDomain::nonneg_orthant() {
  YDomain d;
  d.kind = Kind::kNonnegOrthant;
  return d;
}

YDomain YDomain::box(Vector lower, Vector upper) {
  if (lower.size() != upper.size()) {
    throw DimensionError("y box domain: bound length mismatch");
  }
  if (((upper - lower).array() < 0.0).any()) {
    throw DomainError("y box domain: lower bound exceeds upper bound");
  }
  YDomain d;
  d.kind = Kind::kBox;
  d.lower = std::move(lower);
  d.upper = std::move(upper);
  return d;
}

Vector YDomain::project(const Vector& y) const {
  switch (kind) {
    case Kind::kFree:
      return y;
    case Kind::kNonnegOrthant:
      return y.cwiseMax(0.0);
    case Kind::kBox:
      require_len(y, lower.size(), "y domain argument");
      return y.cwiseMax(lower).cwiseMin(upper);
  }
  return y;
}

bool YDomain::contains(const Vector& y, double tol) const {
  switch (kind) {
    case Kind::kFree:
      return true;
    case Kind::kNonnegOrthant:
      return !(y.array() < -tol).any();
    case Kind::kBox:
      require_len(y, lower.size(), "y domain argument");
      return !(((y - upper).array() > tol).any() ||
               ((lower - y).array() > tol).any());
  }
  return true;
}

ProblemSpec::ProblemSpec(std::vector<Block> blocks, TailFunction tail,
                         Matrix b_mat, Vector rhs, YDomain y_domain)
    : blocks_(std::move(blocks)),
      tail_(std::move(tail)),
      b_mat_(std::move(b_mat)),
      rhs_(std::move(rhs)),
      y_domain_(std::move(y_domain)) {
  if (blocks_.empty()) {
    throw DimensionError("problem: at least one block is required");
  }
  const Index n = rhs_.size();
  if (n == 0) throw DimensionError("problem: empty right-hand side");
  for (size_t i = 0; i < blocks_.size(); ++i) {
    const Block& blk = blocks_[i];
    std::ostringstream who;
    who << "block " << i;
    if (blk.a.rows() != n) {
      std::ostringstream os;
      os << who.str() << ": coupling matrix has " << blk.a.rows()
         << " rows, expected " << n;
      throw DimensionError(os.str());
    }
    if (blk.a.cols() == 0) {
      throw DimensionError(who.str() + ": empty coupling matrix");
    }
    const Index m = blk.a.cols();
    if (blk.f.kind != BlockFunction::Kind::kL1Nonneg &&
        blk.f.c.size() != m) {
      std::ostringstream os;
      os << who.str() << ": objective coefficient has length "
         << blk.f.c.size() << ", expected " << m;
      throw DimensionError(os.str());
    }
    if (numeric::scaled_min_singular_ratio(blk.a) <= numeric::Tol::rank) {
      throw DomainError(who.str() +
                        ": coupling matrix does not have full column rank");
    }
  }
  if (b_mat_.rows() != n) {
    std::ostringstream os;
    os << "tail coupling matrix has " << b_mat_.rows() << " rows, expected "
       << n;
    throw DimensionError(os.str());
  }
  if (b_mat_.cols() == 0) {
    throw DimensionError("tail coupling matrix is empty");
  }
  if (numeric::scaled_min_singular_ratio(b_mat_) <= numeric::Tol::rank) {
    throw DomainError("tail coupling matrix does not have full column rank");
  }
  const Index d = b_mat_.cols();
  if (tail_.g_kind != TailFunction::GKind::kZero && tail_.g_c.size() != d) {
    throw DimensionError("tail objective coefficient length mismatch");
  }
  if (tail_.h_kind == TailFunction::HKind::kIndicatorBox &&
      tail_.h_lower.size() != d) {
    throw DimensionError("tail box bound length mismatch");
  }
  if (y_domain_.kind == YDomain::Kind::kBox && y_domain_.lower.size() != d) {
    throw DimensionError("y domain bound length mismatch");
  }
}

Index ProblemSpec::x_dim() const {
  Index m = 0;
  for (const Block& blk : blocks_) m += blk.a.cols();
  return m;
}

Vector ProblemSpec::apply_a(const std::vector<Vector>& x) const {
  if (x.size() != blocks_.size()) {
    throw DimensionError("apply_a: wrong number of block values");
  }
  Vector out = Vector::Zero(n());
  for (size_t i = 0; i < blocks_.size(); ++i) {
    if (x[i].size() != blocks_[i].a.cols()) {
      std::ostringstream os;
      os << "block " << i << ": value has length " << x[i].size()
         << ", expected " << blocks_[i].a.cols();
      throw DimensionError(os.str());
    }
    out.noalias() += blocks_[i].a * x[i];
  }
  return out;
}

void ProblemSpec::check_point_dims(const std::vector<Vector>& x,
                                   const Vector& y) const {
  if (x.size() != blocks_.size()) {
    throw DimensionError("point: wrong number of block values");
  }
  for (size_t i = 0; i < blocks_.size(); ++i) {
    if (x[i].size() != blocks_[i].a.cols()) {
      std::ostringstream os;
      os << "block " << i << ": value has length " << x[i].size()
         << ", expected " << blocks_[i].a.cols();
      throw DimensionError(os.str());
    }
  }
  if (y.size() != y_dim()) {
    std::ostringstream os;
    os << "tail value has length " << y.size() << ", expected " << y_dim();
    throw DimensionError(os.str());
  }
}

double evaluate_objective(const ProblemSpec& spec, const std::vector<Vector>& x,
                          const Vector& y, double feas_tol) {
  spec.check_point_dims(x, y);
  double total = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    total += spec.blocks()[i].f.value(x[i]);
  }
  total += spec.tail().g_value(y);
  const double h = spec.tail().h_value(y, feas_tol);
  if (h == kInf) return kInf;
  return total + h;
}

Vector primal_residual(const ProblemSpec& spec, const std::vector<Vector>& x,
                       const Vector& y) {
  spec.check_point_dims(x, y);
  return spec.apply_a(x) + spec.b_mat() * y - spec.rhs();
}

SparseSignalInstance generate_sparse_signal_instance(Index n_rows,
                                                     Index block_size, Index p,
                                                     double sparsity,
                                                     std::uint64_t seed) {
  if (n_rows < 1 || block_size < 1 || p < 1) {
    throw DomainError("sparse signal generator: dimensions must be positive");
  }
  if (sparsity < 0.0 || sparsity > 1.0) {
    throw DomainError("sparse signal generator: sparsity must lie in [0, 1]");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  const Index groups = p + 1;
  const Index cols = groups * block_size;
  Matrix a_full(n_rows, cols);
  for (Index i = 0; i < n_rows; ++i) {
    for (Index j = 0; j < cols; ++j) a_full(i, j) = normal(rng);
  }
  for (Index j = 0; j < cols; ++j) {
    const double cn = a_full.col(j).norm();
    if (cn > 0.0) a_full.col(j) /= cn;
  }

  Vector planted = Vector::Zero(cols);
  for (Index j = 0; j < cols; ++j) {
    const bool on = uniform(rng) < sparsity;
    const double mag = std::abs(normal(rng));
    if (on) planted(j) = mag;
  }
  const Vector rhs = a_full * planted;

  std::vector<Block> blocks;
  blocks.reserve(static_cast<size_t>(p));
  std::vector<Vector> planted_blocks;
  for (Index i = 0; i < p; ++i) {
    Block blk;
    blk.f = BlockFunction::l1_nonneg(1.0);
    blk.a = a_full.middleCols(i * block_size, block_size);
    blocks.push_back(std::move(blk));
    planted_blocks.push_back(planted.segment(i * block_size, block_size));
  }
  Matrix b_mat = a_full.middleCols(p * block_size, block_size);
  Vector planted_y = planted.segment(p * block_size, block_size);

  TailFunction tail = TailFunction::linear_g(Vector::Ones(block_size));
  ProblemSpec spec(std::move(blocks), std::move(tail), std::move(b_mat), rhs,
                   YDomain::nonneg_orthant());
  return SparseSignalInstance{std::move(spec), std::move(planted_blocks),
                              std::move(planted_y)};
}

LpBoxDualInstance generate_lp_box_dual_instance(Index m, Index n,
                                                std::uint64_t seed) {
  if (m < 1 || n < 1) {
    throw DomainError("lp box dual generator: dimensions must be positive");
  }
  if (m > n) {
    throw DomainError("lp box dual generator: requires m <= n");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  Matrix lp_b(m, n);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < n; ++j) lp_b(i, j) = normal(rng);
  }
  Vector lp_c(n);
  for (Index j = 0; j < n; ++j) lp_c(j) = normal(rng);
  Vector lower(n), upper(n);
  for (Index j = 0; j < n; ++j) lower(j) = -1.0 - 0.5 * std::abs(normal(rng));
  for (Index j = 0; j < n; ++j) upper(j) = 1.0 + 0.5 * std::abs(normal(rng));
  Vector interior(n);
  for (Index j = 0; j < n; ++j) {
    interior(j) = lower(j) + uniform(rng) * (upper(j) - lower(j));
  }
  const Vector lp_d = lp_b * interior;

  std::vector<Block> blocks(2);
  blocks[0].f = BlockFunction::linear(upper);
  blocks[0].a = Matrix::Identity(n, n);
  blocks[1].f = BlockFunction::linear(-lower);
  blocks[1].a = -Matrix::Identity(n, n);

  TailFunction tail = TailFunction::linear_g(lp_d);
  ProblemSpec spec(std::move(blocks), std::move(tail), lp_b.transpose(),
                   -lp_c, YDomain::free_space());
  return LpBoxDualInstance{std::move(spec), std::move(lp_b), std::move(lp_c),
                           lp_d, std::move(lower), std::move(upper)};
}

}  // namespace lqpadmm
