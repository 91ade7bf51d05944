#include "mhmgt/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mhmgt/errors.hpp"

namespace mhmgt {

EvalCost cost_of(Order order) noexcept {
  switch (order) {
    case Order::Value:
      return {1, 0, 0};
    case Order::Gradient:
      return {1, 1, 0};
    case Order::Hessian:
      return {1, 1, 1};
  }
  return {};
}

namespace {

bool wants_gradient(Order o) { return o != Order::Value; }
bool wants_hessian(Order o) { return o == Order::Hessian; }

std::vector<Index> to_vector(std::span<const Index> s) {
  return {s.begin(), s.end()};
}

}  // namespace

EvalResult DifferentiableTarget::evaluate_block(const Vector& x,
                                                std::span<const Index> block,
                                                Order order) const {
  EvalResult full = evaluate(x, order);
  if (full.gradient) {
    Vector g(static_cast<Index>(block.size()));
    for (std::size_t a = 0; a < block.size(); ++a) g(a) = (*full.gradient)(block[a]);
    full.gradient = std::move(g);
  }
  if (full.hessian) full.hessian = full.hessian->principal(block);
  return full;
}

// --- logistic --------------------------------------------------------------

double log1p_exp_neg(double t) noexcept {
  return std::log1p(std::exp(-std::abs(t))) + std::max(-t, 0.0);
}

double sigmoid(double t) noexcept {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

namespace {

// σ(t)(1 - σ(t)) without cancellation.
double logistic_weight(double t) noexcept {
  const double e = std::exp(-std::abs(t));
  return e / ((1.0 + e) * (1.0 + e));
}

}  // namespace

LogisticTarget::LogisticTarget(Matrix design, Vector response)
    : x_(std::move(design)), y_(std::move(response)) {
  require_dim(y_.size(), x_.rows(), "logistic response length");
  if (x_.cols() < 1) throw DimensionMismatch("logistic design has no columns");
  if (!x_.allFinite()) throw std::invalid_argument("logistic design not finite");
  for (Index i = 0; i < y_.size(); ++i) {
    if (y_(i) != 0.0 && y_(i) != 1.0) {
      throw std::invalid_argument("logistic response must be 0 or 1");
    }
  }
}

EvalResult LogisticTarget::evaluate(const Vector& beta, Order order) const {
  require_dim(beta.size(), dim(), "LogisticTarget::evaluate");
  const Vector t = x_ * beta;
  EvalResult r;
  r.cost = cost_of(order);
  double v = 0.0;
  for (Index i = 0; i < t.size(); ++i) {
    v -= (1.0 - y_(i)) * t(i) + log1p_exp_neg(t(i));
  }
  r.value = v;
  if (wants_gradient(order)) {
    const Vector resid = y_ - t.unaryExpr(&sigmoid);
    r.gradient = x_.transpose() * resid;
  }
  if (wants_hessian(order)) {
    const Vector w = t.unaryExpr(&logistic_weight);
    r.hessian = SymMatrix(-(x_.transpose() * w.asDiagonal() * x_));
  }
  return r;
}

EvalResult LogisticTarget::evaluate_block(const Vector& beta,
                                          std::span<const Index> block,
                                          Order order) const {
  require_dim(beta.size(), dim(), "LogisticTarget::evaluate_block");
  const Vector t = x_ * beta;
  EvalResult r;
  r.cost = cost_of(order);
  double v = 0.0;
  for (Index i = 0; i < t.size(); ++i) {
    v -= (1.0 - y_(i)) * t(i) + log1p_exp_neg(t(i));
  }
  r.value = v;
  if (order == Order::Value) return r;
  const Matrix xb = x_(Eigen::all, to_vector(block));
  const Vector resid = y_ - t.unaryExpr(&sigmoid);
  r.gradient = xb.transpose() * resid;
  if (wants_hessian(order)) {
    const Vector w = t.unaryExpr(&logistic_weight);
    r.hessian = SymMatrix(-(xb.transpose() * w.asDiagonal() * xb));
  }
  return r;
}

std::shared_ptr<const LogisticTarget> logistic_target(Matrix design,
                                                      Vector response) {
  return std::make_shared<const LogisticTarget>(std::move(design),
                                                std::move(response));
}

// --- Poisson ---------------------------------------------------------------

PoissonLogRateTarget::PoissonLogRateTarget(std::vector<int> counts)
    : counts_(std::move(counts)) {
  if (counts_.empty()) {
    throw std::invalid_argument("Poisson target needs at least one count");
  }
  for (int y : counts_) {
    if (y < 0) throw std::invalid_argument("Poisson counts must be >= 0");
    total_ += y;
  }
}

EvalResult PoissonLogRateTarget::evaluate(const Vector& u, Order order) const {
  require_dim(u.size(), 1, "PoissonLogRateTarget::evaluate");
  const double n = static_cast<double>(counts_.size());
  const double e = std::exp(u(0));
  EvalResult r;
  r.cost = cost_of(order);
  r.value = total_ * u(0) - n * e;
  if (wants_gradient(order)) r.gradient = Vector::Constant(1, total_ - n * e);
  if (wants_hessian(order)) r.hessian = SymMatrix(Matrix::Constant(1, 1, -n * e));
  return r;
}

double PoissonLogRateTarget::third_derivative(double u) const {
  return -static_cast<double>(counts_.size()) * std::exp(u);
}

double PoissonLogRateTarget::mode() const {
  if (total_ <= 0.0) {
    throw ModeNotFound("Poisson counts are all zero: mode is at -infinity");
  }
  return std::log(total_ / static_cast<double>(counts_.size()));
}

std::shared_ptr<const PoissonLogRateTarget> poisson_lograte_target(
    std::vector<int> counts) {
  return std::make_shared<const PoissonLogRateTarget>(std::move(counts));
}

FunctionTarget1D::FunctionTarget1D(Fn f, Fn d1, Fn d2, Fn d3)
    : f_(std::move(f)), d1_(std::move(d1)), d2_(std::move(d2)), d3_(std::move(d3)) {}

EvalResult FunctionTarget1D::evaluate(const Vector& u, Order order) const {
  require_dim(u.size(), 1, "FunctionTarget1D::evaluate");
  EvalResult r;
  r.cost = cost_of(order);
  r.value = f_(u(0));
  if (wants_gradient(order)) r.gradient = Vector::Constant(1, d1_(u(0)));
  if (wants_hessian(order)) r.hessian = SymMatrix(Matrix::Constant(1, 1, d2_(u(0))));
  return r;
}

// --- Gaussian prior --------------------------------------------------------

GaussianPrior::GaussianPrior(Vector mean, SymMatrix precision)
    : mean_(std::move(mean)), precision_(std::move(precision)) {
  require_dim(precision_.dim(), mean_.size(), "GaussianPrior precision");
  (void)cholesky(precision_);
}

EvalResult GaussianPrior::evaluate(const Vector& beta, Order order) const {
  require_dim(beta.size(), dim(), "GaussianPrior::evaluate");
  const Vector d = beta - mean_;
  const Vector pd = precision_.matrix() * d;
  EvalResult r;
  r.cost = cost_of(order);
  r.value = -0.5 * d.dot(pd);
  if (wants_gradient(order)) r.gradient = -pd;
  if (wants_hessian(order)) r.hessian = -precision_;
  return r;
}

std::shared_ptr<const GaussianPrior> gaussian_prior(Vector mean,
                                                    SymMatrix precision) {
  return std::make_shared<const GaussianPrior>(std::move(mean),
                                               std::move(precision));
}

// --- additive --------------------------------------------------------------

AdditiveTarget::AdditiveTarget(std::vector<TargetPtr> parts)
    : parts_(std::move(parts)) {
  if (parts_.empty()) throw std::invalid_argument("additive target needs parts");
  dim_ = parts_.front()->dim();
  for (const auto& p : parts_) require_dim(p->dim(), dim_, "additive part");
}

namespace {

void accumulate(EvalResult& acc, EvalResult&& part, bool first) {
  if (first) {
    acc = std::move(part);
    return;
  }
  acc.value += part.value;
  if (acc.gradient) *acc.gradient += *part.gradient;
  if (acc.hessian) *acc.hessian = *acc.hessian + *part.hessian;
  acc.cost += part.cost;
}

}  // namespace

EvalResult AdditiveTarget::evaluate(const Vector& x, Order order) const {
  EvalResult acc;
  for (std::size_t k = 0; k < parts_.size(); ++k) {
    accumulate(acc, parts_[k]->evaluate(x, order), k == 0);
  }
  return acc;
}

EvalResult AdditiveTarget::evaluate_block(const Vector& x,
                                          std::span<const Index> block,
                                          Order order) const {
  EvalResult acc;
  for (std::size_t k = 0; k < parts_.size(); ++k) {
    accumulate(acc, parts_[k]->evaluate_block(x, block, order), k == 0);
  }
  return acc;
}

std::shared_ptr<const AdditiveTarget> additive_target(
    std::vector<TargetPtr> parts) {
  return std::make_shared<const AdditiveTarget>(std::move(parts));
}

// --- projection bases ------------------------------------------------------

BernoulliBase::BernoulliBase(Vector response) : y_(std::move(response)) {
  for (Index i = 0; i < y_.size(); ++i) {
    if (y_(i) != 0.0 && y_(i) != 1.0) {
      throw std::invalid_argument("Bernoulli response must be 0 or 1");
    }
  }
}

void BernoulliBase::evaluate(Index i, const Vector& u, Order order,
                             BaseTerm& out) const {
  const double t = u(0);
  out.value = -(1.0 - y_(i)) * t - log1p_exp_neg(t);
  if (wants_gradient(order)) out.gradient = Vector::Constant(1, y_(i) - sigmoid(t));
  if (wants_hessian(order)) out.hessian = Matrix::Constant(1, 1, -logistic_weight(t));
}

QuadraticBase::QuadraticBase(SymMatrix curvature, Matrix centers)
    : a_(std::move(curvature)), c_(std::move(centers)) {
  require_dim(c_.cols(), a_.dim(), "QuadraticBase centers");
  (void)cholesky(a_);
}

void QuadraticBase::evaluate(Index i, const Vector& u, Order order,
                             BaseTerm& out) const {
  const Vector d = u - c_.row(i).transpose();
  const Vector ad = a_.matrix() * d;
  out.value = -0.5 * d.dot(ad);
  if (wants_gradient(order)) out.gradient = -ad;
  if (wants_hessian(order)) out.hessian = -a_.matrix();
}

// --- rank utilities --------------------------------------------------------

Index numerical_rank(const Matrix& x) {
  if (x.size() == 0) return 0;
  Eigen::ColPivHouseholderQR<Matrix> qr(x);
  const double tol = kRankTolerance * x.norm();
  const Index k = std::min(x.rows(), x.cols());
  const auto diag = qr.matrixR().diagonal();
  Index rank = 0;
  for (Index d = 0; d < k; ++d) {
    if (std::abs(diag(d)) > tol) ++rank;
  }
  return rank;
}

Matrix null_space(const Matrix& x) {
  Eigen::JacobiSVD<Matrix> svd(x, Eigen::ComputeFullV);
  return svd.matrixV().rightCols(x.cols() - numerical_rank(x));
}

// --- linear projection -----------------------------------------------------

LinearProjectionModel::LinearProjectionModel(
    std::shared_ptr<const ProjectionBase> base, std::vector<Matrix> designs)
    : base_(std::move(base)), x_(std::move(designs)) {
  if (!base_) throw std::invalid_argument("projection model needs a base");
  require_dim(static_cast<Index>(x_.size()), base_->arity(),
              "number of designs vs base arity");
  n_ = base_->observations();
  for (const auto& x : x_) {
    require_dim(x.rows(), n_, "design rows");
    if (x.cols() < 1) throw DimensionMismatch("design has no columns");
    if (!x.allFinite()) throw std::invalid_argument("design not finite");
    offsets_.push_back(dim_);
    dim_ += x.cols();
    ranks_.push_back(numerical_rank(x));
  }
}

bool LinearProjectionModel::all_full_rank() const {
  for (Index j = 0; j < groups(); ++j) {
    if (!full_rank(j)) return false;
  }
  return true;
}

Matrix LinearProjectionModel::project(const Vector& beta) const {
  require_dim(beta.size(), dim_, "LinearProjectionModel::project");
  Matrix u(n_, groups());
  for (Index j = 0; j < groups(); ++j) {
    u.col(j) = x_[j] * beta.segment(offsets_[j], x_[j].cols());
  }
  return u;
}

EvalResult LinearProjectionModel::evaluate(const Vector& beta,
                                           Order order) const {
  const Matrix u = project(beta);
  const Index jn = groups();
  Matrix gw(n_, jn);
  std::vector<Vector> hw(static_cast<std::size_t>(jn * jn), Vector(n_));
  BaseTerm term;
  EvalResult r;
  r.cost = cost_of(order);
  double value = 0.0;
  for (Index i = 0; i < n_; ++i) {
    base_->evaluate(i, u.row(i).transpose(), order, term);
    if (!std::isfinite(term.value)) {
      throw std::domain_error("base density not finite at observation " +
                              std::to_string(i));
    }
    value += term.value;
    if (wants_gradient(order)) gw.row(i) = term.gradient.transpose();
    if (wants_hessian(order)) {
      for (Index j = 0; j < jn; ++j) {
        for (Index k = 0; k < jn; ++k) hw[j * jn + k](i) = term.hessian(j, k);
      }
    }
  }
  r.value = value;
  if (wants_gradient(order)) {
    Vector g(dim_);
    for (Index j = 0; j < jn; ++j) {
      g.segment(offsets_[j], x_[j].cols()) = x_[j].transpose() * gw.col(j);
    }
    r.gradient = std::move(g);
  }
  if (wants_hessian(order)) {
    Matrix h(dim_, dim_);
    for (Index j = 0; j < jn; ++j) {
      for (Index k = 0; k <= j; ++k) {
        h.block(offsets_[j], offsets_[k], x_[j].cols(), x_[k].cols()) =
            x_[j].transpose() * hw[j * jn + k].asDiagonal() * x_[k];
      }
    }
    r.hessian = SymMatrix(std::move(h));
  }
  return r;
}

LinearProjectionTarget::LinearProjectionTarget(LinearProjectionModel model)
    : model_(std::move(model)) {
  if (!model_.all_full_rank()) {
    throw std::invalid_argument(
        "linear projection target needs full-rank designs");
  }
}

std::shared_ptr<const LinearProjectionTarget> linear_projection_target(
    LinearProjectionModel model) {
  return std::make_shared<const LinearProjectionTarget>(std::move(model));
}

// --- witness ---------------------------------------------------------------

WitnessReport negative_definiteness_witness(const LinearProjectionModel& model,
                                            const Vector& beta,
                                            std::size_t trials, Rng& rng) {
  const EvalResult r = model.evaluate(beta, Order::Hessian);
  const SymMatrix& h = *r.hessian;
  WitnessReport report;
  report.hessian_norm = h.matrix().norm();

  if (model.all_full_rank()) {
    try {
      (void)cholesky(-h);
      report.kind = WitnessReport::Kind::Certificate;
    } catch (const NotPositiveDefinite&) {
      report.kind = WitnessReport::Kind::Violation;
    }
    return report;
  }

  std::vector<Matrix> kernels;
  for (Index j = 0; j < model.groups(); ++j) {
    kernels.push_back(model.full_rank(j) ? Matrix(model.block_size(j), 0)
                                         : null_space(model.design(j)));
  }
  report.kind = WitnessReport::Kind::Witness;
  report.trials = std::max<std::size_t>(trials, 1);
  for (std::size_t t = 0; t < report.trials; ++t) {
    Vector p = Vector::Zero(model.dim());
    for (Index j = 0; j < model.groups(); ++j) {
      if (kernels[j].cols() == 0) continue;
      Vector c(kernels[j].cols());
      for (Index k = 0; k < c.size(); ++k) c(k) = standard_normal(rng);
      p.segment(model.offset(j), model.block_size(j)) = kernels[j] * c;
    }
    p /= p.norm();
    const double quad = p.dot(h.matrix() * p);
    const double rel = report.hessian_norm > 0.0
                           ? std::abs(quad) / report.hessian_norm
                           : std::abs(quad);
    if (t == 0) report.p = p;
    report.relative_quad_form = std::max(report.relative_quad_form, rel);
  }
  return report;
}

const char* to_string(WitnessReport::Kind kind) noexcept {
  switch (kind) {
    case WitnessReport::Kind::Certificate:
      return "certificate";
    case WitnessReport::Kind::Witness:
      return "witness";
    case WitnessReport::Kind::Violation:
      return "violation";
  }
  return "unknown";
}

}  // namespace mhmgt
