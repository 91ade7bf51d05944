#include <chrono>

#include <gtest/gtest.h>

#include "mhmgt/theorem.hpp"

using namespace mhmgt;
using Kind = WitnessReport::Kind;

TEST(TheoremInstance, Validation) {
  EXPECT_THROW((TheoremInstance{{}, 10, BaseFamily::Bernoulli, {}, 0}.validate()),
               std::invalid_argument);
  EXPECT_THROW((TheoremInstance{{3, 3}, 10, BaseFamily::Bernoulli, {0, 0}, 0}.validate()),
               std::invalid_argument);
  EXPECT_THROW((TheoremInstance{{3}, 10, BaseFamily::Bernoulli, {3}, 0}.validate()),
               std::invalid_argument);
  EXPECT_THROW((TheoremInstance{{6}, 5, BaseFamily::Bernoulli, {0}, 0}.validate()),
               std::invalid_argument);
  EXPECT_THROW((TheoremInstance{{3, 2}, 10, BaseFamily::Quadratic, {0}, 0}.validate()),
               std::exception);
}

TEST(TheoremInstance, LogisticFullRankGivesCertificate) {
  const auto out = run_instance({{4}, 20, BaseFamily::Bernoulli, {0}, 11});
  EXPECT_TRUE(out.passed) << out.failure;
  EXPECT_EQ(out.predicted, Kind::Certificate);
  EXPECT_EQ(out.observed, Kind::Certificate);
  EXPECT_LT(out.assembly_rel_err, kAssemblyTolerance);
  EXPECT_LE(out.qi_identity_rel_err, kIdentityTolerance);
  EXPECT_FALSE(out.witness_rel.has_value());
}

TEST(TheoremInstance, AllDeficientGivesWitness) {
  for (auto family : {BaseFamily::Bernoulli, BaseFamily::Quadratic}) {
    const TheoremInstance inst = family == BaseFamily::Bernoulli
                                     ? TheoremInstance{{4}, 20, family, {1}, 12}
                                     : TheoremInstance{{3, 4}, 25, family, {1, 2}, 12};
    const auto out = run_instance(inst);
    EXPECT_TRUE(out.passed) << out.failure;
    EXPECT_EQ(out.observed, Kind::Witness);
    ASSERT_TRUE(out.witness_rel.has_value());
    EXPECT_LE(*out.witness_rel, kWitnessTolerance);
  }
}

TEST(TheoremInstance, OneDeficientDesignAlreadyBreaksDefiniteness) {
  const auto out = run_instance({{3, 3}, 20, BaseFamily::Quadratic, {0, 1}, 13});
  EXPECT_TRUE(out.passed) << out.failure;
  EXPECT_EQ(out.predicted, Kind::Witness);
  ASSERT_TRUE(out.witness_rel.has_value());
  EXPECT_LE(*out.witness_rel, kWitnessTolerance);
}

TEST(TheoremInstance, IdentityDesignUnitCurvature) {
  Matrix centers = Matrix::Zero(4, 1);
  auto base = std::make_shared<QuadraticBase>(SymMatrix::identity(1), centers);
  const LinearProjectionModel model(base, {Matrix::Identity(4, 4)});
  Vector beta(4);
  beta << 0.3, -1.0, 2.0, 0.0;
  const Matrix h = model.evaluate(beta, Order::Hessian).hessian->matrix();
  EXPECT_TRUE(h == -Matrix::Identity(4, 4));
  Rng rng(14);
  EXPECT_EQ(negative_definiteness_witness(model, beta, 1, rng).kind, Kind::Certificate);
}

TEST(TheoremAssembly, FiniteDifferenceAndProjectionRoutesAgree) {
  for (const auto& inst : random_instances(20, 15)) {
    const auto real = realize(inst);
    const Matrix h = real.model.evaluate(real.beta, Order::Hessian).hessian->matrix();
    const Matrix h_fd = finite_difference_hessian(real.model, real.beta);
    EXPECT_LT((h - h_fd).norm() / h.norm(), kAssemblyTolerance);
    Rng rng(inst.seed);
    Vector p(h.rows());
    for (Index k = 0; k < p.size(); ++k) p(k) = standard_normal(rng);
    EXPECT_NEAR(projected_quadratic_form(real.model, real.beta, p), p.dot(h * p),
                kIdentityTolerance * h.norm() * p.squaredNorm());
  }
}

TEST(TheoremCampaign, RandomPlansCoverBothSides) {
  const auto instances = random_instances(100, 16);
  std::size_t full = 0, deficient = 0, bernoulli = 0;
  for (const auto& inst : instances) {
    EXPECT_NO_THROW(inst.validate());
    inst.all_full_rank() ? ++full : ++deficient;
    bernoulli += inst.family == BaseFamily::Bernoulli;
  }
  EXPECT_GT(full, 20u);
  EXPECT_GT(deficient, 20u);
  EXPECT_GT(bernoulli, 20u);
  EXPECT_LT(bernoulli, 80u);
}

TEST(TheoremCampaign, HundredInstancesAllPass) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto report = run_campaign(random_instances(100, 17));
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_EQ(report.outcomes.size(), 100u);
  for (const auto& o : report.outcomes) {
    EXPECT_TRUE(o.passed) << "seed " << o.instance.seed << ": " << o.failure;
  }
  EXPECT_TRUE(report.all_passed());
  EXPECT_LT(seconds, 30.0);
}
