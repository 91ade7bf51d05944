#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "mhmgt/diagnostics.hpp"
#include "mhmgt/errors.hpp"
#include "mhmgt/mgt.hpp"
#include "support/quadrature.hpp"

using namespace mhmgt;
using mhmgt::testing::Quadrature1D;

namespace {

SymMatrix random_spd(Index n, Rng& rng) {
  Matrix a(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = standard_normal(rng);
  Matrix m = a * a.transpose();
  m.diagonal().array() += 0.5;
  return SymMatrix(m);
}

Vector random_vector(Index n, Rng& rng, double scale = 1.0) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = scale * standard_normal(rng);
  return v;
}

std::vector<double> column(const Matrix& m, Index c) {
  return {m.col(c).data(), m.col(c).data() + m.rows()};
}

// Log-concave for u < 1, convex beyond.
std::shared_ptr<FunctionTarget1D> kinked_target() {
  return std::make_shared<FunctionTarget1D>(
      [](double u) { return -0.5 * u * u + (u > 1 ? (u - 1) * (u - 1) : 0.0); },
      [](double u) { return -u + (u > 1 ? 2 * (u - 1) : 0.0); },
      [](double u) { return u > 1 ? 1.0 : -1.0; }, [](double) { return 0.0; });
}

}  // namespace

TEST(BuildProposal, GaussianTargetProposalIsTheTarget) {
  Rng rng(1);
  for (Index d = 1; d <= 10; ++d) {
    const SymMatrix p = random_spd(d, rng);
    const Vector m = random_vector(d, rng);
    const auto target = gaussian_prior(m, p);
    for (int rep = 0; rep < 5; ++rep) {
      const auto q = build_proposal(*target, random_vector(d, rng, 3.0));
      EXPECT_LE((q.mean() - m).norm(), 1e-10 * (1 + m.norm()));
      EXPECT_LE((q.precision() - p.matrix()).norm(), 1e-10 * p.matrix().norm());
    }
  }
}

TEST(BuildProposal, PoissonAtZero) {
  // f'(0) = 2 - e^0 = 1, f''(0) = -1: mean 0 - 1/(-1) = 1, precision 1.
  const auto q = build_proposal(*poisson_lograte_target({2}), Vector::Zero(1));
  EXPECT_NEAR(q.mean()(0), 1.0, 1e-15);
  EXPECT_NEAR(q.precision()(0, 0), 1.0, 1e-15);
}

TEST(BuildProposal, MeanIsModeAtMode) {
  const auto t = poisson_lograte_target({3, 1, 2});
  const Vector mode = Vector::Constant(1, t->mode());
  EXPECT_NEAR(build_proposal(*t, mode).mean()(0), mode(0), 1e-14);
}

TEST(BuildProposal, NonConcavePointThrows) {
  EXPECT_THROW((void)build_proposal(*kinked_target(), Vector::Constant(1, 2.0)),
               HessianNotNegativeDefinite);
}

TEST(MgtStep, GaussianAlwaysAccepts) {
  Rng rng(2);
  const SymMatrix p = random_spd(4, rng);
  const auto t = gaussian_prior(random_vector(4, rng), p);
  Vector x = random_vector(4, rng, 5.0);
  std::optional<MgtState> cache;
  for (int i = 0; i < 1000; ++i) {
    auto out = mgt_step(*t, x, cache, rng);
    EXPECT_TRUE(out.record.accepted);
    EXPECT_NEAR(out.record.log_ratio, 0.0, 1e-9);
    x = out.state.x;
    cache = std::move(out.state);
  }
}

TEST(MgtStep, ProposalAtCurrentPointHasZeroLogRatio) {
  const auto t = poisson_lograte_target({2});
  EvalCost cost;
  const MgtState s = evaluate_state(*t, Vector::Constant(1, -0.4), cost);
  Rng rng(3);
  const auto out = mh_transition(*t, s, s.x, rng);
  EXPECT_EQ(out.record.log_ratio, 0.0);
  EXPECT_TRUE(out.record.accepted);
}

TEST(MgtStep, HessianFailureAtProposalRejects) {
  const auto t = kinked_target();
  EvalCost cost;
  const MgtState s = evaluate_state(*t, Vector::Zero(1), cost);
  Rng rng(4);
  const auto out = mh_transition(*t, s, Vector::Constant(1, 1.5), rng);
  EXPECT_FALSE(out.record.accepted);
  EXPECT_TRUE(out.record.hessian_failure);
  EXPECT_EQ(out.record.log_ratio, -std::numeric_limits<double>::infinity());
  EXPECT_EQ(out.state.x(0), 0.0);
}

TEST(MgtStep, PoissonMeanMatchesQuadrature) {
  const auto t = poisson_lograte_target({2});
  const Quadrature1D quad(mhmgt::testing::poisson_logf(2, 1), -10, 5);
  EXPECT_NEAR(quad.mean(), 0.42278433509846713, 1e-6);  // digamma(2)

  Rng rng(5);
  MgtConfig cfg{0, 0, 10000, 5, true};
  const auto trace = run_chain(*t, Vector::Constant(1, std::log(2.0)), cfg, rng);
  const auto u = column(trace.samples, 0);
  const double mean = trace.samples.col(0).mean();
  EXPECT_LT(std::abs(mean - quad.mean()), 3 * mcse(u));
}

TEST(Newton, QuadraticConvergesInOneStep) {
  Rng rng(6);
  const Vector m = random_vector(5, rng);
  const auto t = gaussian_prior(m, random_spd(5, rng));
  EXPECT_LE((newton_step(*t, random_vector(5, rng, 10.0)) - m).norm(), 1e-9);
}

TEST(Newton, PoissonRecurrenceFromMinusOnePointFive) {
  // u <- u + 2 e^{-u} - 1, evaluated independently in double precision.
  const double expected[] = {6.463378140676129,  5.466497177733937,
                             4.474949196176681,  3.497730797788771,
                             2.5582627681843038, 1.7131410750189935,
                             1.073738216825967,  0.7571955585655734,
                             0.6951551803828069, 0.6931491952428697,
                             0.6931471805619749};
  const auto t = poisson_lograte_target({2});
  Vector u = Vector::Constant(1, -1.5);
  for (double e : expected) {
    u = newton_step(*t, u);
    EXPECT_NEAR(u(0), e, 1e-12 * (1 + std::abs(e)));
  }
  EXPECT_NEAR(u(0), std::log(2.0), 1e-6);
}

TEST(Newton, ModeIsFixedPoint) {
  const auto t = poisson_lograte_target({2});
  const Vector mode = Vector::Constant(1, std::log(2.0));
  EXPECT_NEAR(newton_step(*t, mode)(0), mode(0), 1e-15);
}

TEST(RunChain, EmptySampleCount) {
  Rng rng(7);
  const auto t = poisson_lograte_target({2});
  const auto trace = run_chain(*t, Vector::Zero(1), MgtConfig{2, 4, 0, 7}, rng);
  EXPECT_EQ(trace.size(), 0);
  EXPECT_TRUE(trace.accepted.empty());
  EXPECT_EQ(trace.burnin_path.rows(), 4);
  EXPECT_GT(trace.burnin_cost.n_hessian, 0u);
}

TEST(RunChain, GaussianWithNewtonStartAcceptsAll) {
  Rng rng(8);
  const auto t = gaussian_prior(random_vector(3, rng), random_spd(3, rng));
  const auto trace = run_chain(*t, random_vector(3, rng, 4.0), MgtConfig{1, 1, 500, 8}, rng);
  EXPECT_EQ(trace.acceptance_rate(), 1.0);
}

TEST(RunChain, DefaultSplitIsHalfBurnin) {
  EXPECT_EQ(MgtConfig::with_burnin(500, 500, 1).n_newton, 250u);
  EXPECT_EQ(MgtConfig::with_burnin(7, 1, 1).n_newton, 3u);
  EXPECT_THROW((MgtConfig{5, 4, 1, 0}.validate()), std::invalid_argument);
}

TEST(RunChain, EvaluationAccounting) {
  Rng rng(9);
  const auto gauss = gaussian_prior(Vector::Zero(2), SymMatrix::identity(2));
  const std::size_t n = 300;
  auto trace = run_chain(*gauss, Vector::Ones(2), MgtConfig{0, 0, n, 9, true}, rng);
  EXPECT_EQ(trace.acceptance_rate(), 1.0);
  EXPECT_EQ((trace.burnin_cost + trace.sampling_cost).n_hessian, n + 1);

  const auto pois = poisson_lograte_target({2});
  trace = run_chain(*pois, Vector::Zero(1), MgtConfig{0, 0, n, 9, true}, rng);
  EXPECT_LT(trace.acceptance_rate(), 1.0);
  EXPECT_EQ(trace.sampling_cost.n_hessian, n + 1);

  trace = run_chain(*pois, Vector::Zero(1), MgtConfig{0, 0, n, 9, false}, rng);
  EXPECT_EQ(trace.sampling_cost.n_hessian, 2 * n);
  for (std::size_t k = 1; k < trace.cumulative_cost.size(); ++k) {
    EXPECT_GE(trace.cumulative_cost[k].n_value, trace.cumulative_cost[k - 1].n_value);
  }
}

TEST(RunChain, DeterministicForSeed) {
  const auto t = poisson_lograte_target({2, 4});
  Rng a(10), b(10);
  const auto ta = run_chain(*t, Vector::Constant(1, -1.0), MgtConfig::with_burnin(20, 200, 10), a);
  const auto tb = run_chain(*t, Vector::Constant(1, -1.0), MgtConfig::with_burnin(20, 200, 10), b);
  EXPECT_TRUE(ta.samples == tb.samples);
  EXPECT_EQ(ta.accepted, tb.accepted);
}

TEST(RunChain, SurvivesProposalHessianFailures) {
  Rng rng(11);
  const auto trace = run_chain(*kinked_target(), Vector::Zero(1), MgtConfig{0, 0, 2000, 11}, rng);
  EXPECT_GT(trace.hessian_failures, 0u);
  EXPECT_LT(trace.samples.col(0).maxCoeff(), 1.0);
  EXPECT_THROW(run_chain(*kinked_target(), Vector::Constant(1, 3.0), MgtConfig{0, 0, 10, 0}, rng),
               HessianNotNegativeDefinite);
  EXPECT_THROW(run_chain(*kinked_target(), Vector::Constant(1, 3.0), MgtConfig{1, 1, 10, 0}, rng),
               HessianNotNegativeDefinite);
}

TEST(RunChain, PoissonDistributionMatchesQuadrature) {
  const Quadrature1D quad(mhmgt::testing::poisson_logf(2, 1), -10, 5);
  // Closed form: e^u ~ Gamma(2, 1), so P(U <= u) = 1 - e^{-λ}(1 + λ).
  for (double u : {-1.0, 0.0, 0.7, 1.5}) {
    const double lam = std::exp(u);
    EXPECT_NEAR(quad.cdf(u), 1 - std::exp(-lam) * (1 + lam), 1e-8);
  }
  Rng rng(12);
  const auto trace = run_chain(*poisson_lograte_target({2}), Vector::Constant(1, std::log(2.0)),
                               MgtConfig{0, 100, 100000, 12}, rng);
  EXPECT_LT(quad.ks(column(trace.samples, 0)), 0.01);
}
