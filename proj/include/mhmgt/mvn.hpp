#pragma once

#include <span>

#include <Eigen/Dense>

#include "mhmgt/rng.hpp"

namespace mhmgt {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Dense symmetric matrix. The lower triangle of the input is authoritative
/// and is mirrored into the upper triangle on construction.
class SymMatrix {
 public:
  explicit SymMatrix(Matrix m);

  static SymMatrix identity(Index dim);
  static SymMatrix diagonal(const Vector& diag);

  Index dim() const noexcept { return m_.rows(); }
  const Matrix& matrix() const noexcept { return m_; }
  double operator()(Index i, Index j) const { return m_(i, j); }

  SymMatrix operator-() const;
  SymMatrix operator+(const SymMatrix& other) const;
  SymMatrix principal(std::span<const Index> idx) const;

 private:
  struct Trusted {};
  SymMatrix(Matrix m, Trusted) : m_(std::move(m)) {}

  Matrix m_;
};

/// Lower-triangular L with strictly positive diagonal such that L·Lᵀ is the
/// factored matrix.
class CholeskyFactor {
 public:
  Index dim() const noexcept { return lower_.rows(); }
  const Matrix& lower() const noexcept { return lower_; }

  /// Solves (L·Lᵀ) x = b.
  Vector solve(const Vector& b) const;
  /// Solves Lᵀ x = z.
  Vector solve_upper(const Vector& z) const;
  /// Returns Lᵀ v.
  Vector multiply_upper(const Vector& v) const;
  /// log det(L·Lᵀ).
  double log_det() const;
  Matrix reconstruct() const { return lower_ * lower_.transpose(); }

 private:
  friend CholeskyFactor cholesky(const SymMatrix& m);
  explicit CholeskyFactor(Matrix lower) : lower_(std::move(lower)) {}

  Matrix lower_;
};

/// Pivot threshold relative to the largest diagonal entry.
inline constexpr double kPivotTolerance = 1e-12;

/// Throws NotPositiveDefinite with the 0-based pivot index on failure.
CholeskyFactor cholesky(const SymMatrix& m);

/// Multivariate normal in precision parameterization: the factor holds the
/// Cholesky factor of the precision matrix.
class MvnDistribution {
 public:
  MvnDistribution(Vector mean, CholeskyFactor precision_factor);

  Index dim() const noexcept { return mean_.size(); }
  const Vector& mean() const noexcept { return mean_; }
  const CholeskyFactor& factor() const noexcept { return factor_; }
  Matrix precision() const { return factor_.reconstruct(); }

  double log_pdf(const Vector& x) const;

  /// mean + L⁻ᵀ z with z ~ N(0, I), drawn coordinate 0 first.
  Vector sample(Rng& rng) const;

 private:
  Vector mean_;
  CholeskyFactor factor_;
};

}  // namespace mhmgt
