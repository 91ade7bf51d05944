#include "mhmgt/mvn.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "mhmgt/errors.hpp"

namespace mhmgt {

SymMatrix::SymMatrix(Matrix m) : m_(std::move(m)) {
  if (m_.rows() < 1 || m_.rows() != m_.cols()) {
    throw DimensionMismatch("SymMatrix requires a non-empty square matrix");
  }
  for (Index j = 0; j < m_.cols(); ++j) {
    for (Index i = j; i < m_.rows(); ++i) {
      if (!std::isfinite(m_(i, j))) {
        throw std::invalid_argument("SymMatrix entries must be finite");
      }
      m_(j, i) = m_(i, j);
    }
  }
}

SymMatrix SymMatrix::identity(Index dim) {
  return SymMatrix(Matrix::Identity(dim, dim));
}

SymMatrix SymMatrix::diagonal(const Vector& diag) {
  return SymMatrix(Matrix(diag.asDiagonal()));
}

SymMatrix SymMatrix::operator-() const { return SymMatrix(-m_, Trusted{}); }

SymMatrix SymMatrix::operator+(const SymMatrix& other) const {
  require_dim(other.dim(), dim(), "SymMatrix addition");
  return SymMatrix(m_ + other.m_, Trusted{});
}

SymMatrix SymMatrix::principal(std::span<const Index> idx) const {
  const auto n = static_cast<Index>(idx.size());
  Matrix sub(n, n);
  for (Index a = 0; a < n; ++a) {
    for (Index b = 0; b < n; ++b) sub(a, b) = m_(idx[a], idx[b]);
  }
  return SymMatrix(std::move(sub), Trusted{});
}

CholeskyFactor cholesky(const SymMatrix& m) {
  const Index n = m.dim();
  const Matrix& a = m.matrix();
  const double tol = kPivotTolerance * a.diagonal().maxCoeff();
  Matrix l = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    double pivot = a(j, j);
    for (Index k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);
    if (!(pivot > 0.0) || !(pivot > tol)) {
      throw NotPositiveDefinite(static_cast<std::size_t>(j), pivot);
    }
    const double ljj = std::sqrt(pivot);
    l(j, j) = ljj;
    for (Index i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return CholeskyFactor(std::move(l));
}

Vector CholeskyFactor::solve(const Vector& b) const {
  require_dim(b.size(), dim(), "CholeskyFactor::solve");
  Vector y = lower_.triangularView<Eigen::Lower>().solve(b);
  return solve_upper(y);
}

Vector CholeskyFactor::solve_upper(const Vector& z) const {
  require_dim(z.size(), dim(), "CholeskyFactor::solve_upper");
  return lower_.transpose().triangularView<Eigen::Upper>().solve(z);
}

Vector CholeskyFactor::multiply_upper(const Vector& v) const {
  require_dim(v.size(), dim(), "CholeskyFactor::multiply_upper");
  return lower_.transpose().triangularView<Eigen::Upper>() * v;
}

double CholeskyFactor::log_det() const {
  return 2.0 * lower_.diagonal().array().log().sum();
}

MvnDistribution::MvnDistribution(Vector mean, CholeskyFactor precision_factor)
    : mean_(std::move(mean)), factor_(std::move(precision_factor)) {
  require_dim(factor_.dim(), mean_.size(), "MvnDistribution");
  if (!mean_.allFinite()) {
    throw std::invalid_argument("MvnDistribution mean must be finite");
  }
}

double MvnDistribution::log_pdf(const Vector& x) const {
  require_dim(x.size(), dim(), "MvnDistribution::log_pdf");
  const Vector w = factor_.multiply_upper(x - mean_);
  const double k = static_cast<double>(dim());
  return -0.5 * k * std::log(2.0 * std::numbers::pi) +
         0.5 * factor_.log_det() - 0.5 * w.squaredNorm();
}

Vector MvnDistribution::sample(Rng& rng) const {
  Vector z(dim());
  for (Index k = 0; k < dim(); ++k) z(k) = standard_normal(rng);
  return mean_ + factor_.solve_upper(z);
}

}  // namespace mhmgt
