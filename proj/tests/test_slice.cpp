#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "mhmgt/errors.hpp"
#include "mhmgt/mgt.hpp"
#include "mhmgt/slice.hpp"
#include "support/quadrature.hpp"

using namespace mhmgt;
using mhmgt::testing::Quadrature1D;

namespace {

std::vector<double> column(const Matrix& m, Index c) {
  return {m.col(c).data(), m.col(c).data() + m.rows()};
}

double sample_variance(const std::vector<double>& xs) {
  double m = 0, s = 0;
  for (double x : xs) m += x;
  m /= xs.size();
  for (double x : xs) s += (x - m) * (x - m);
  return s / (xs.size() - 1);
}

}  // namespace

TEST(SliceStep, StandardNormalMoments) {
  const auto logf = [](double x) { return -0.5 * x * x; };
  Rng rng(1);
  SliceConfig cfg;
  std::vector<double> xs;
  double x = 0, fx = 0;
  for (int i = 0; i < 100000; ++i) {
    const auto s = slice_step_1d(logf, x, cfg, rng, fx);
    x = s.x;
    fx = s.log_density;
    EXPECT_EQ(fx, logf(x));
    xs.push_back(x);
  }
  double mean = 0;
  for (double v : xs) mean += v;
  mean /= xs.size();
  EXPECT_NEAR(mean, 0.0, 0.02);
  EXPECT_NEAR(sample_variance(xs), 1.0, 0.05);
}

TEST(SliceStep, CountsEvaluations) {
  int calls = 0;
  const auto logf = [&](double x) { ++calls; return -0.5 * x * x; };
  Rng rng(2);
  auto s = slice_step_1d(logf, 0.3, SliceConfig{}, rng);
  EXPECT_EQ(s.n_evals, static_cast<std::size_t>(calls));
  calls = 0;
  s = slice_step_1d(logf, s.x, SliceConfig{}, rng, s.log_density);
  EXPECT_EQ(s.n_evals, static_cast<std::size_t>(calls));
  EXPECT_GE(s.n_evals, 3u);  // two bracket ends and one accepted point at least
}

TEST(SliceStep, DegenerateWidthTerminates) {
  const auto logf = [](double x) { return -0.5 * x * x; };
  Rng rng(3);
  SliceConfig cfg{1e-12, 1, 0};
  const auto s = slice_step_1d(logf, 0.5, cfg, rng);
  EXPECT_NEAR(s.x, 0.5, 1e-11);
  EXPECT_GE(s.log_density, logf(0.5) - 1e-10);
}

TEST(SliceStep, SpikeCollapsesOntoCurrentPoint) {
  const double x0 = 0.1;
  const auto spike = [&](double x) {
    return x == x0 ? 0.0 : -std::numeric_limits<double>::infinity();
  };
  Rng rng(4);
  EXPECT_EQ(slice_step_1d(spike, x0, SliceConfig{}, rng).x, x0);
}

TEST(SliceStep, Errors) {
  Rng rng(4);
  // A stale logf(x) above the true value leaves the slice empty.
  const auto logf = [](double x) { return -0.5 * x * x - 100.0; };
  EXPECT_THROW(slice_step_1d(logf, 0.0, SliceConfig{}, rng, 0.0), SliceFailure);
  EXPECT_THROW(slice_step_1d([](double) { return std::nan(""); }, 0.0, SliceConfig{}, rng),
               SliceFailure);
  EXPECT_THROW((SliceConfig{0.0, 10, 0}.validate()), std::invalid_argument);
  EXPECT_THROW((SliceConfig{1.0, 0, 0}.validate()), std::invalid_argument);
}

TEST(SliceStep, PoissonDistributionMatchesQuadrature) {
  const Quadrature1D quad(mhmgt::testing::poisson_logf(2, 1), -10, 5);
  Rng rng(5);
  const auto trace = slice_gibbs_chain(*poisson_lograte_target({2}), Vector::Zero(1), 100,
                                       100000, SliceConfig{}, rng);
  EXPECT_LT(quad.ks(column(trace.samples, 0)), 0.01);
}

TEST(SliceGibbs, IndependentGaussianMoments) {
  Vector mean(2);
  mean << 1.0, -2.0;
  const auto t = gaussian_prior(mean, SymMatrix::diagonal(Vector::Constant(2, 1.0).cwiseQuotient(
                                          (Vector(2) << 0.25, 4.0).finished())));
  Rng rng(6);
  const auto trace = slice_gibbs_chain(*t, Vector::Zero(2), 100, 10000, SliceConfig{}, rng);
  ASSERT_EQ(trace.size(), 10000);
  const double sd[] = {0.5, 2.0};
  for (Index c = 0; c < 2; ++c) {
    const auto xs = column(trace.samples, c);
    EXPECT_NEAR(trace.samples.col(c).mean(), mean(c), 4 * sd[c] / std::sqrt(10000.0) * 2);
    EXPECT_NEAR(sample_variance(xs), sd[c] * sd[c], 0.08 * sd[c] * sd[c]);
  }
  EXPECT_EQ(trace.sampling_cost.n_gradient, 0u);
  EXPECT_EQ(trace.sampling_cost.n_hessian, 0u);
  EXPECT_EQ(trace.cumulative_cost.back().n_value, trace.sampling_cost.n_value);
}

TEST(SliceGibbs, EmptySampleCount) {
  Rng rng(7);
  const auto trace = slice_gibbs_chain(*poisson_lograte_target({2}), Vector::Zero(1), 10, 0,
                                       SliceConfig{}, rng);
  EXPECT_EQ(trace.size(), 0);
  EXPECT_TRUE(trace.cumulative_cost.empty());
}

TEST(SliceGibbs, SweepChangesOneCoordinateAtATime) {
  Rng rng(8);
  Matrix p(3, 3);
  p << 2, 0.5, 0.1, 0.5, 1, 0.2, 0.1, 0.2, 3;
  const auto t = gaussian_prior(Vector::Zero(3), SymMatrix(p));
  // Logging target: records every point the sweep evaluates.
  struct Recorder final : DifferentiableTarget {
    TargetPtr inner;
    mutable std::vector<Vector> seen;
    Index dim() const override { return inner->dim(); }
    EvalResult evaluate(const Vector& x, Order o) const override {
      seen.push_back(x);
      return inner->evaluate(x, o);
    }
  } rec;
  rec.inner = t;
  Vector x = Vector::Ones(3);
  double lp = t->value(x);
  EvalCost cost;
  for (int sweep = 0; sweep < 50; ++sweep) {
    const Vector before = x;
    rec.seen.clear();
    slice_sweep(rec, x, lp, SliceConfig{}, rng, cost);
    // Probes for coordinate c differ from the running state only in c. The
    // last probe before moving on is the accepted value.
    Vector cur = before, last = before;
    Index c = 0;
    const auto differs_outside = [&](const Vector& v) {
      for (Index i = 0; i < 3; ++i)
        if (i != c && v(i) != cur(i)) return true;
      return false;
    };
    for (const Vector& v : rec.seen) {
      while (differs_outside(v)) {
        cur(c) = last(c);
        ++c;
        ASSERT_LT(c, 3);
      }
      last = v;
    }
    cur(c) = last(c);
    EXPECT_TRUE(cur == x);
    EXPECT_EQ(c, 2);
    EXPECT_NEAR(lp, t->value(x), 1e-12);
  }
}

TEST(SliceGibbs, AgreesWithMgtChain) {
  const Quadrature1D quad(mhmgt::testing::poisson_logf(2, 1), -10, 5);
  const auto t = poisson_lograte_target({2});
  Rng a(9), b(10);
  const auto slice = slice_gibbs_chain(*t, Vector::Zero(1), 100, 100000, SliceConfig{}, a);
  const auto mgt = run_chain(*t, Vector::Constant(1, std::log(2.0)), MgtConfig{0, 100, 100000, 10}, b);
  const auto us = column(slice.samples, 0), um = column(mgt.samples, 0);
  EXPECT_LE(quad.ks(us), 0.015);
  EXPECT_LE(quad.ks(um), 0.015);
  EXPECT_LE(mhmgt::testing::ks_two_sample(us, um), 0.015);
}
