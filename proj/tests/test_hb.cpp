#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "mhmgt/diagnostics.hpp"
#include "mhmgt/errors.hpp"
#include "mhmgt/hb.hpp"

using namespace mhmgt;

namespace {

std::vector<double> column(const Matrix& m, Index c) {
  return {m.col(c).data(), m.col(c).data() + m.rows()};
}

}  // namespace

TEST(HbConjugate, TauMatchesGammaPosteriorMean) {
  const double a = 0.001, b = 0.001, ss = 3.7;
  const Index groups = 5;
  Rng rng(1);
  double sum = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += draw_tau(a, b, groups, ss, rng);
  const double expected = (a + groups / 2.0) / (b + ss / 2.0);
  EXPECT_NEAR(sum / n, expected, 0.01 * expected);
}

TEST(HbConjugate, GammaColumnMatchesClosedForm) {
  Matrix z(4, 2);
  z << 1, 0.2, 1, -1.0, 1, 0.5, 1, 1.3;
  Vector beta(4);
  beta << 0.3, -0.2, 0.8, 1.1;
  const double tau = 2.0, lambda = 0.5;
  Matrix prec = tau * z.transpose() * z;
  prec.diagonal().array() += lambda;
  const Vector mean = prec.ldlt().solve(tau * z.transpose() * beta);
  const Matrix cov = prec.inverse();

  Rng rng(2);
  const int n = 100000;
  Matrix draws(n, 2);
  for (int i = 0; i < n; ++i) draws.row(i) = draw_gamma_column(z, beta, tau, lambda, rng).transpose();
  const Vector m = draws.colwise().mean().transpose();
  for (Index c = 0; c < 2; ++c) {
    EXPECT_NEAR(m(c), mean(c), 5 * std::sqrt(cov(c, c) / n));
    const double var = (draws.col(c).array() - m(c)).square().sum() / (n - 1);
    EXPECT_NEAR(var, cov(c, c), 0.03 * cov(c, c));
  }
}

TEST(HbModel, Validation) {
  Rng rng(3);
  auto sim = simulate_hb(HbSimulatorConfig{2, 3, 1, 20, 20}, rng);
  EXPECT_NO_THROW(sim.spec.validate());
  auto bad = sim.spec;
  bad.groups[1].y(0) = 2.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = sim.spec;
  bad.z = Matrix::Ones(3, 1);
  EXPECT_THROW(bad.validate(), DimensionMismatch);
  bad = sim.spec;
  bad.gamma_rate = 0.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  HbConfig cfg;
  cfg.n_newton = cfg.n_burnin + 1;
  EXPECT_THROW(hb_gibbs(sim.spec, cfg, rng), std::invalid_argument);
}

TEST(HbGibbs, EmptySampleCount) {
  Rng rng(4);
  const auto sim = simulate_hb(HbSimulatorConfig{2, 3, 1, 30, 30}, rng);
  HbConfig cfg;
  cfg.n_burnin = 4;
  cfg.n_newton = 2;
  cfg.n_samples = 0;
  const auto trace = hb_gibbs(sim.spec, cfg, rng);
  EXPECT_EQ(trace.beta.rows(), 0);
  EXPECT_EQ(trace.beta.cols(), 6);
  EXPECT_EQ(trace.gamma.cols(), 3);
  EXPECT_EQ(trace.tau.cols(), 3);
}

TEST(HbGibbs, StrongGammaPriorPinsGammaAtZero) {
  Rng rng(5);
  auto sim = simulate_hb(HbSimulatorConfig{1, 4, 1, 200, 200}, rng);
  sim.spec.gamma_precision = 1e10;
  HbConfig cfg;
  cfg.n_burnin = 100;
  cfg.n_newton = 50;
  cfg.n_samples = 200;
  const auto trace = hb_gibbs(sim.spec, cfg, rng);
  EXPECT_LT(trace.gamma.cwiseAbs().maxCoeff(), 1e-3);
  EXPECT_EQ(trace.hessian_failures, 0u);
}

class HbDemo : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    Rng rng(2024);
    sim_ = new HbSimulation(simulate_hb(HbSimulatorConfig{}, rng));
    HbConfig cfg;
    cfg.n_burnin = 500;
    cfg.n_newton = 250;
    cfg.n_samples = 2000;
    Rng a = make_rng(2024, 1), b = make_rng(2024, 2);
    mgt_ = new HbTrace(hb_gibbs(sim_->spec, cfg, a));
    cfg.sampler = BetaSampler::Slice;
    slice_ = new HbTrace(hb_gibbs(sim_->spec, cfg, b));
  }
  static void TearDownTestSuite() {
    delete sim_;
    delete mgt_;
    delete slice_;
  }
  static HbSimulation* sim_;
  static HbTrace* mgt_;
  static HbTrace* slice_;
};

HbSimulation* HbDemo::sim_ = nullptr;
HbTrace* HbDemo::mgt_ = nullptr;
HbTrace* HbDemo::slice_ = nullptr;

TEST_F(HbDemo, ShapesAndNoHessianIncidents) {
  EXPECT_EQ(mgt_->beta.rows(), 2000);
  EXPECT_EQ(mgt_->beta.cols(), 50);
  EXPECT_EQ(mgt_->gamma.cols(), 20);
  EXPECT_EQ(mgt_->tau.cols(), 10);
  EXPECT_EQ(mgt_->hessian_failures, 0u);
  // 5 groups, 2 blocks of 5 each, per sampling cycle.
  EXPECT_EQ(mgt_->block_steps, 2000u * 10);
  EXPECT_EQ(slice_->beta_cost.n_hessian, 0u);
}

TEST_F(HbDemo, TrueCoefficientsCovered) {
  for (const HbTrace* trace : {mgt_, slice_}) {
    int covered = 0;
    for (Index j = 0; j < 5; ++j) {
      for (Index k = 0; k < 10; ++k) {
        auto draws = column(trace->beta, j * 10 + k);
        std::sort(draws.begin(), draws.end());
        const double lo = draws[static_cast<std::size_t>(0.025 * draws.size())];
        const double hi = draws[static_cast<std::size_t>(0.975 * draws.size()) - 1];
        const double truth = sim_->beta_true(j, k);
        covered += truth >= lo && truth <= hi;
      }
    }
    EXPECT_GE(covered, 45) << "of 50";
  }
}

TEST_F(HbDemo, SamplersAgreeOnPosteriorMeans) {
  for (Index c = 0; c < 50; ++c) {
    const auto a = column(mgt_->beta, c), b = column(slice_->beta, c);
    const double diff = mgt_->beta.col(c).mean() - slice_->beta.col(c).mean();
    const double se = std::hypot(mcse(a), mcse(b));
    EXPECT_LE(std::abs(diff), 3 * se) << "coefficient " << c;
  }
}
