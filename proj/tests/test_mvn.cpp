#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "mhmgt/errors.hpp"
#include "mhmgt/mvn.hpp"

using namespace mhmgt;

namespace {

Matrix random_spd(Index n, Rng& rng) {
  Matrix a(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = standard_normal(rng);
  Matrix m = a * a.transpose();
  m.diagonal().array() += 1e-3;
  return m;
}

MvnDistribution standard(Index n) {
  return MvnDistribution(Vector::Zero(n), cholesky(SymMatrix::identity(n)));
}

}  // namespace

TEST(SymMatrix, MirrorsLowerTriangle) {
  Matrix m(2, 2);
  m << 1, 99, 2, 3;
  SymMatrix s(m);
  EXPECT_EQ(s(0, 1), 2.0);
  EXPECT_EQ(s(1, 0), 2.0);
}

TEST(SymMatrix, RejectsNonFinite) {
  Matrix m = Matrix::Identity(2, 2);
  m(1, 0) = NAN;
  EXPECT_THROW(SymMatrix{m}, std::invalid_argument);
}

TEST(Cholesky, Identity) {
  const auto f = cholesky(SymMatrix::identity(3));
  EXPECT_TRUE(f.lower().isApprox(Matrix::Identity(3, 3)));
}

TEST(Cholesky, TwoByTwoByHand) {
  Matrix m(2, 2);
  m << 4, 2, 2, 3;
  const auto f = cholesky(SymMatrix(m));
  EXPECT_DOUBLE_EQ(f.lower()(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(f.lower()(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(f.lower()(0, 1), 0.0);
  EXPECT_NEAR(f.lower()(1, 1), std::sqrt(2.0), 1e-15);
}

TEST(Cholesky, IndefiniteReportsPivot) {
  Matrix m(2, 2);
  m << 1, 2, 2, 1;  // eigenvalues 3 and -1
  try {
    (void)cholesky(SymMatrix(m));
    FAIL() << "expected NotPositiveDefinite";
  } catch (const NotPositiveDefinite& e) {
    EXPECT_EQ(e.pivot(), 1u);
    EXPECT_DOUBLE_EQ(e.value(), -3.0);
  }
}

TEST(Cholesky, TinyPivotRejected) {
  Matrix m(2, 2);
  m << 1, 1, 1, 1 + 1e-14;
  EXPECT_THROW((void)cholesky(SymMatrix(m)), NotPositiveDefinite);
}

TEST(Cholesky, ReconstructsRandomSpd) {
  Rng rng(11);
  for (Index n = 1; n <= 20; ++n) {
    const Matrix m = random_spd(n, rng);
    const auto f = cholesky(SymMatrix(m));
    EXPECT_LE((f.reconstruct() - m).norm() / m.norm(), 1e-10) << "dim " << n;
    EXPECT_TRUE((f.lower().diagonal().array() > 0).all());
    const Vector b = Vector::LinSpaced(n, -1, 1);
    EXPECT_LE((m * f.solve(b) - b).norm(), 1e-8 * m.norm() * (1 + b.norm()));
  }
}

TEST(MvnLogPdf, ClosedForms) {
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  EXPECT_NEAR(standard(1).log_pdf(Vector::Zero(1)), -half_log_2pi, 1e-15);
  EXPECT_NEAR(standard(1).log_pdf(Vector::Zero(1)), -0.9189385332, 1e-10);
  EXPECT_NEAR(standard(4).log_pdf(Vector::Zero(4)), -4 * half_log_2pi, 1e-14);

  MvnDistribution d(Vector::Constant(1, 1.5),
                    cholesky(SymMatrix(Matrix::Constant(1, 1, 4.0))));
  const double expected = -half_log_2pi + std::log(2.0) - 0.5 * 4.0 * 0.25;
  EXPECT_NEAR(d.log_pdf(Vector::Constant(1, 2.0)), expected, 1e-14);
  EXPECT_NEAR(expected, -0.7258, 1e-4);
}

TEST(MvnLogPdf, IntegratesToOne1D) {
  MvnDistribution d(Vector::Constant(1, 0.3),
                    cholesky(SymMatrix(Matrix::Constant(1, 1, 2.5))));
  const double sd = 1.0 / std::sqrt(2.5);
  const int n = 20001;
  const double lo = 0.3 - 8 * sd, h = 16 * sd / (n - 1);
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    s += w * std::exp(d.log_pdf(Vector::Constant(1, lo + i * h)));
  }
  EXPECT_NEAR(s * h, 1.0, 1e-6);
}

TEST(MvnLogPdf, IntegratesToOne2D) {
  Matrix p(2, 2);
  p << 2.0, 0.6, 0.6, 1.0;
  MvnDistribution d(Vector::Zero(2), cholesky(SymMatrix(p)));
  const Matrix cov = p.inverse();
  const double s0 = std::sqrt(cov(0, 0)), s1 = std::sqrt(cov(1, 1));
  const int n = 801;
  const double h0 = 16 * s0 / (n - 1), h1 = 16 * s1 / (n - 1);
  double s = 0.0;
  Vector x(2);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double w = ((i == 0 || i == n - 1) ? 0.5 : 1.0) * ((j == 0 || j == n - 1) ? 0.5 : 1.0);
      x << -8 * s0 + i * h0, -8 * s1 + j * h1;
      s += w * std::exp(d.log_pdf(x));
    }
  }
  EXPECT_NEAR(s * h0 * h1, 1.0, 1e-6);
}

TEST(MvnSample, DeterministicGivenSeed) {
  const auto d = standard(1);
  Rng a(5), b(5);
  EXPECT_EQ(d.sample(a)(0), d.sample(b)(0));
}

TEST(MvnSample, HugePrecisionStaysAtMean) {
  MvnDistribution d(Vector::Constant(3, 2.0),
                    cholesky(SymMatrix::diagonal(Vector::Constant(3, 1e12))));
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_LT((d.sample(rng).array() - 2.0).abs().maxCoeff(), 1e-5);
  }
}

TEST(MvnSample, MomentsConverge) {
  Matrix p(2, 2);
  p << 1.5, -0.9, -0.9, 1.2;
  const Vector mu = (Vector(2) << 1.0, -2.0).finished();
  MvnDistribution d(mu, cholesky(SymMatrix(p)));
  const Matrix cov = p.inverse();
  Rng rng(99);
  const int n = 100000;
  Vector mean = Vector::Zero(2);
  Matrix second = Matrix::Zero(2, 2);
  for (int i = 0; i < n; ++i) {
    const Vector x = d.sample(rng);
    mean += x;
    second += x * x.transpose();
  }
  mean /= n;
  const Matrix emp = second / n - mean * mean.transpose();
  EXPECT_LT((mean - mu).cwiseAbs().maxCoeff(), 0.05 * mu.cwiseAbs().maxCoeff());
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      EXPECT_NEAR(emp(i, j), cov(i, j), 0.05 * std::abs(cov(i, j))) << i << j;
}
