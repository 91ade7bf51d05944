#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mhmgt/mvn.hpp"
#include "mhmgt/rng.hpp"

namespace mhmgt {

/// Number of value, gradient and Hessian evaluations a result cost.
struct EvalCost {
  std::uint64_t n_value = 0;
  std::uint64_t n_gradient = 0;
  std::uint64_t n_hessian = 0;

  EvalCost& operator+=(const EvalCost& o) noexcept {
    n_value += o.n_value;
    n_gradient += o.n_gradient;
    n_hessian += o.n_hessian;
    return *this;
  }
  friend EvalCost operator+(EvalCost a, const EvalCost& b) noexcept {
    return a += b;
  }
  friend bool operator==(const EvalCost&, const EvalCost&) = default;
};

/// Highest derivative requested from an evaluation. Each order includes the
/// lower ones.
enum class Order { Value, Gradient, Hessian };

EvalCost cost_of(Order order) noexcept;

struct EvalResult {
  double value = 0.0;
  std::optional<Vector> gradient;
  std::optional<SymMatrix> hessian;
  EvalCost cost;
};

/// Twice-differentiable log-density, defined up to an additive constant.
/// Implementations are immutable; evaluate() is safe to call concurrently.
class DifferentiableTarget {
 public:
  virtual ~DifferentiableTarget() = default;

  virtual Index dim() const = 0;
  virtual EvalResult evaluate(const Vector& x, Order order) const = 0;

  /// Full value, with gradient and Hessian restricted to the coordinates in
  /// `block`. The default evaluates everything and restricts.
  virtual EvalResult evaluate_block(const Vector& x,
                                    std::span<const Index> block,
                                    Order order) const;

  double value(const Vector& x) const {
    return evaluate(x, Order::Value).value;
  }
};

using TargetPtr = std::shared_ptr<const DifferentiableTarget>;

/// One-dimensional target that also exposes f'''.
class UnivariateTargetWithThird : public DifferentiableTarget {
 public:
  Index dim() const final { return 1; }
  virtual double third_derivative(double u) const = 0;
};

// ---------------------------------------------------------------------------
// Logistic regression likelihood
//
//   f(β) = -Σ_i [(1 - y_i) t_i + log(1 + exp(-t_i))],  t_i = x_iᵀβ
//
// No constant is dropped. Gradient Σ (y_i - σ(t_i)) x_i, Hessian
// -Σ σ_i(1 - σ_i) x_i x_iᵀ.
class LogisticTarget final : public DifferentiableTarget {
 public:
  LogisticTarget(Matrix design, Vector response);

  Index dim() const override { return x_.cols(); }
  Index observations() const noexcept { return x_.rows(); }
  const Matrix& design() const noexcept { return x_; }
  const Vector& response() const noexcept { return y_; }

  EvalResult evaluate(const Vector& beta, Order order) const override;
  EvalResult evaluate_block(const Vector& beta, std::span<const Index> block,
                            Order order) const override;

 private:
  Matrix x_;
  Vector y_;
};

std::shared_ptr<const LogisticTarget> logistic_target(Matrix design,
                                                      Vector response);

/// Numerically stable log(1 + exp(-t)).
double log1p_exp_neg(double t) noexcept;
/// Logistic function 1 / (1 + exp(-t)).
double sigmoid(double t) noexcept;

// ---------------------------------------------------------------------------
// Poisson likelihood in log-rate u = log λ:
//   f(u) = Σ_i (y_i u - e^u)     (drops Σ log y_i!)
class PoissonLogRateTarget final : public UnivariateTargetWithThird {
 public:
  explicit PoissonLogRateTarget(std::vector<int> counts);

  EvalResult evaluate(const Vector& u, Order order) const override;
  double third_derivative(double u) const override;

  /// log(mean(y)); throws ModeNotFound when every count is zero.
  double mode() const;
  std::size_t observations() const noexcept { return counts_.size(); }
  double total() const noexcept { return total_; }

 private:
  std::vector<int> counts_;
  double total_ = 0.0;
};

std::shared_ptr<const PoissonLogRateTarget> poisson_lograte_target(
    std::vector<int> counts);

/// Univariate target built from closed-form derivative callables.
class FunctionTarget1D final : public UnivariateTargetWithThird {
 public:
  using Fn = std::function<double(double)>;
  FunctionTarget1D(Fn f, Fn d1, Fn d2, Fn d3);

  EvalResult evaluate(const Vector& u, Order order) const override;
  double third_derivative(double u) const override { return d3_(u); }

 private:
  Fn f_, d1_, d2_, d3_;
};

// ---------------------------------------------------------------------------
// Gaussian prior -½ (β - m)ᵀ P (β - m)   (drops the normalizing constant)
class GaussianPrior final : public DifferentiableTarget {
 public:
  /// Throws NotPositiveDefinite if `precision` is not positive definite.
  GaussianPrior(Vector mean, SymMatrix precision);

  Index dim() const override { return mean_.size(); }
  const Vector& mean() const noexcept { return mean_; }
  const SymMatrix& precision() const noexcept { return precision_; }

  EvalResult evaluate(const Vector& beta, Order order) const override;

 private:
  Vector mean_;
  SymMatrix precision_;
};

std::shared_ptr<const GaussianPrior> gaussian_prior(Vector mean,
                                                    SymMatrix precision);

/// Sum of targets sharing one dimension; costs add up.
class AdditiveTarget final : public DifferentiableTarget {
 public:
  explicit AdditiveTarget(std::vector<TargetPtr> parts);

  Index dim() const override { return dim_; }
  const std::vector<TargetPtr>& parts() const noexcept { return parts_; }

  EvalResult evaluate(const Vector& x, Order order) const override;
  EvalResult evaluate_block(const Vector& x, std::span<const Index> block,
                            Order order) const override;

 private:
  std::vector<TargetPtr> parts_;
  Index dim_ = 0;
};

std::shared_ptr<const AdditiveTarget> additive_target(
    std::vector<TargetPtr> parts);

// ---------------------------------------------------------------------------
// Linear-projection models
//
//   g(β_1..β_J) = Σ_i f^i(<x_1^i, β_1>, ..., <x_J^i, β_J>)

/// Value, gradient and Hessian of one observation's base density in u.
struct BaseTerm {
  double value = 0.0;
  Vector gradient;
  Matrix hessian;
};

/// Per-observation base density family f^i(u_1..u_J).
class ProjectionBase {
 public:
  virtual ~ProjectionBase() = default;
  virtual Index arity() const = 0;
  virtual Index observations() const = 0;
  virtual std::string name() const = 0;
  virtual void evaluate(Index i, const Vector& u, Order order,
                        BaseTerm& out) const = 0;
};

/// f^i(u) = -(1 - y_i) u - log(1 + exp(-u)); J = 1.
class BernoulliBase final : public ProjectionBase {
 public:
  explicit BernoulliBase(Vector response);
  Index arity() const override { return 1; }
  Index observations() const override { return y_.size(); }
  std::string name() const override { return "bernoulli"; }
  void evaluate(Index i, const Vector& u, Order order,
                BaseTerm& out) const override;

 private:
  Vector y_;
};

/// f^i(u) = -½ (u - c_i)ᵀ A (u - c_i) with A positive definite.
class QuadraticBase final : public ProjectionBase {
 public:
  /// `centers` is N × J.
  QuadraticBase(SymMatrix curvature, Matrix centers);
  Index arity() const override { return a_.dim(); }
  Index observations() const override { return c_.rows(); }
  std::string name() const override { return "quadratic"; }
  void evaluate(Index i, const Vector& u, Order order,
                BaseTerm& out) const override;

 private:
  SymMatrix a_;
  Matrix c_;
};

/// Relative tolerance for numerical column rank of a design.
inline constexpr double kRankTolerance = 1e-10;

/// Column rank via column-pivoted QR, |R_kk| > kRankTolerance · ‖X‖_F.
Index numerical_rank(const Matrix& x);
/// Orthonormal basis (columns) of the null space of x, sized by
/// numerical_rank.
Matrix null_space(const Matrix& x);

class LinearProjectionModel {
 public:
  LinearProjectionModel(std::shared_ptr<const ProjectionBase> base,
                        std::vector<Matrix> designs);

  Index groups() const noexcept { return static_cast<Index>(x_.size()); }
  Index observations() const noexcept { return n_; }
  Index dim() const noexcept { return dim_; }
  Index block_size(Index j) const { return x_[j].cols(); }
  Index offset(Index j) const { return offsets_[j]; }
  const Matrix& design(Index j) const { return x_[j]; }
  const ProjectionBase& base() const noexcept { return *base_; }

  Index rank(Index j) const { return ranks_[j]; }
  bool full_rank(Index j) const { return ranks_[j] == x_[j].cols(); }
  bool all_full_rank() const;

  /// u(i, j) = <x_j^i, β_j>.
  Matrix project(const Vector& beta) const;

  /// Chain-rule assembly: gradient blocks Σ_i f^i_{u_j} x_j^i and Hessian
  /// blocks H_jj' = Σ_i f^i_{u_j u_j'} x_j^i x_j'^iᵀ.
  EvalResult evaluate(const Vector& beta, Order order) const;

 private:
  std::shared_ptr<const ProjectionBase> base_;
  std::vector<Matrix> x_;
  std::vector<Index> offsets_;
  std::vector<Index> ranks_;
  Index n_ = 0;
  Index dim_ = 0;
};

class LinearProjectionTarget final : public DifferentiableTarget {
 public:
  /// Requires at least one full-column-rank design.
  explicit LinearProjectionTarget(LinearProjectionModel model);

  Index dim() const override { return model_.dim(); }
  const LinearProjectionModel& model() const noexcept { return model_; }
  EvalResult evaluate(const Vector& beta, Order order) const override {
    return model_.evaluate(beta, order);
  }

 private:
  LinearProjectionModel model_;
};

std::shared_ptr<const LinearProjectionTarget> linear_projection_target(
    LinearProjectionModel model);

struct WitnessReport {
  enum class Kind {
    Certificate,  // Cholesky of -H succeeded
    Witness,      // nonzero p with pᵀHp ≈ 0 built from design null spaces
    Violation,    // every design full rank yet -H failed to factor
  };
  Kind kind = Kind::Certificate;
  Vector p;
  /// Largest |pᵀHp| / (‖H‖_F ‖p‖²) over the witness trials.
  double relative_quad_form = 0.0;
  double hessian_norm = 0.0;
  std::size_t trials = 0;
};

/// Certificate when every design has full column rank. Otherwise a
/// degenerate direction p: random null-space vectors for the deficient
/// designs, zero blocks for the rest. `trials` such directions are tested.
WitnessReport negative_definiteness_witness(const LinearProjectionModel& model,
                                            const Vector& beta,
                                            std::size_t trials, Rng& rng);

const char* to_string(WitnessReport::Kind kind) noexcept;

}  // namespace mhmgt
