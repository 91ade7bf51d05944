#include "mhmgt/hb.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mhmgt/errors.hpp"
#include "mhmgt/gibbs.hpp"

namespace mhmgt {

void HbModelSpec::validate() const {
  if (groups.empty()) throw std::invalid_argument("HB spec needs groups");
  if (K() < 1 || L() < 1) throw std::invalid_argument("HB spec needs K, L >= 1");
  require_dim(z.rows(), J(), "HB upper design rows");
  for (const auto& g : groups) {
    require_dim(g.x.cols(), K(), "HB group covariates");
    require_dim(g.y.size(), g.x.rows(), "HB group responses");
    if (!(g.y.array() == 0.0 || g.y.array() == 1.0).all()) {
      throw std::invalid_argument("HB responses must be 0 or 1");
    }
  }
  if (!(gamma_shape > 0.0) || !(gamma_rate > 0.0) || !(gamma_precision > 0.0)) {
    throw std::invalid_argument("HB hyperparameters must be positive");
  }
}

Vector draw_gamma_column(const Matrix& z, const Vector& beta_k, double tau_k,
                         double lambda, Rng& rng) {
  Matrix precision = tau_k * (z.transpose() * z);
  precision.diagonal().array() += lambda;
  CholeskyFactor factor = cholesky(SymMatrix(std::move(precision)));
  Vector mean = factor.solve(tau_k * (z.transpose() * beta_k));
  return MvnDistribution(std::move(mean), std::move(factor)).sample(rng);
}

double draw_tau(double shape, double rate, Index groups, double ss, Rng& rng) {
  const double a = shape + 0.5 * static_cast<double>(groups);
  const double b = rate + 0.5 * ss;
  return std::gamma_distribution<double>(a, 1.0 / b)(rng);
}

namespace {

void require_finite(const Matrix& m, const char* what, std::size_t cycle) {
  if (!m.allFinite()) {
    throw NonFiniteDraw(std::string("non-finite ") + what + " draw at cycle " +
                        std::to_string(cycle));
  }
}

}  // namespace

HbTrace hb_gibbs(const HbModelSpec& spec, const HbConfig& cfg, Rng& rng) {
  spec.validate();
  if (cfg.n_newton > cfg.n_burnin) {
    throw std::invalid_argument("n_newton must not exceed n_burnin");
  }
  cfg.slice.validate();
  const Index J = spec.J(), K = spec.K(), L = spec.L();

  std::vector<TargetPtr> likelihoods;
  for (const auto& g : spec.groups) likelihoods.push_back(logistic_target(g.x, g.y));
  const BlockPartition partition = BlockPartition::contiguous(K, cfg.block_size);

  Matrix beta = Matrix::Zero(J, K);
  Matrix gamma = Matrix::Zero(L, K);
  Vector tau = Vector::Ones(K);

  HbTrace trace;
  const auto n = static_cast<Index>(cfg.n_samples);
  trace.beta.resize(n, J * K);
  trace.gamma.resize(n, L * K);
  trace.tau.resize(n, K);

  const std::size_t cycles = cfg.n_burnin + cfg.n_samples;
  for (std::size_t c = 0; c < cycles; ++c) {
    const bool recording = c >= cfg.n_burnin;
    const auto t0 = std::chrono::steady_clock::now();
    EvalCost cost;
    const Matrix prior_means = spec.z * gamma;  // J × K
    for (Index j = 0; j < J; ++j) {
      auto prior = gaussian_prior(prior_means.row(j).transpose(), SymMatrix::diagonal(tau));
      AdditiveTarget posterior({likelihoods[j], prior});
      Vector b = beta.row(j).transpose();
      if (cfg.sampler == BetaSampler::MgtBlocks) {
        const SweepMode mode = c < cfg.n_newton ? SweepMode::Newton : SweepMode::Sample;
        SweepResult s = block_mgt_sweep(posterior, partition, b, rng, mode);
        cost += s.cost;
        trace.hessian_failures += s.hessian_failures;
        if (mode == SweepMode::Sample && recording) {
          for (const auto& r : s.blocks) {
            ++trace.block_steps;
            trace.block_accepts += r.accepted ? 1 : 0;
          }
        }
        b = std::move(s.x);
      } else {
        double fb = posterior.value(b);
        cost.n_value += 1;
        slice_sweep(posterior, b, fb, cfg.slice, rng, cost);
      }
      beta.row(j) = b.transpose();
    }
    require_finite(beta, "beta", c);
    if (recording) {
      trace.beta_wall_time +=
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      trace.beta_cost += cost;
    }

    for (Index k = 0; k < K; ++k) {
      gamma.col(k) = draw_gamma_column(spec.z, beta.col(k), tau(k),
                                       spec.gamma_precision, rng);
    }
    require_finite(gamma, "gamma", c);

    const Matrix resid = beta - spec.z * gamma;
    for (Index k = 0; k < K; ++k) {
      tau(k) = draw_tau(spec.gamma_shape, spec.gamma_rate, J,
                        resid.col(k).squaredNorm(), rng);
    }
    require_finite(tau, "tau", c);

    if (recording) {
      const auto row = static_cast<Index>(c - cfg.n_burnin);
      for (Index j = 0; j < J; ++j) trace.beta.block(row, j * K, 1, K) = beta.row(j);
      for (Index l = 0; l < L; ++l) trace.gamma.block(row, l * K, 1, K) = gamma.row(l);
      trace.tau.row(row) = tau.transpose();
    }
  }
  return trace;
}

HbSimulation simulate_hb(const HbSimulatorConfig& cfg, Rng& rng) {
  if (cfg.J < 1 || cfg.K < 1 || cfg.L < 1 || cfg.n_min < 1 || cfg.n_max < cfg.n_min) {
    throw std::invalid_argument("invalid HB simulator configuration");
  }
  HbSimulation sim;
  auto& spec = sim.spec;
  spec.z.resize(cfg.J, cfg.L);
  for (Index j = 0; j < cfg.J; ++j) {
    spec.z(j, 0) = 1.0;
    for (Index l = 1; l < cfg.L; ++l) spec.z(j, l) = standard_normal(rng);
  }
  sim.gamma_true.resize(cfg.L, cfg.K);
  for (Index l = 0; l < cfg.L; ++l) {
    for (Index k = 0; k < cfg.K; ++k) sim.gamma_true(l, k) = cfg.gamma_sd * standard_normal(rng);
  }
  sim.beta_true = spec.z * sim.gamma_true;
  for (Index j = 0; j < cfg.J; ++j) {
    for (Index k = 0; k < cfg.K; ++k) sim.beta_true(j, k) += cfg.beta_sd * standard_normal(rng);
  }
  const double log_lo = std::log(static_cast<double>(cfg.n_min));
  const double log_hi = std::log(static_cast<double>(cfg.n_max) + 1.0);
  for (Index j = 0; j < cfg.J; ++j) {
    Index nj = cfg.n_min;
    if (cfg.n_max > cfg.n_min) {
      nj = std::min<Index>(cfg.n_max, static_cast<Index>(std::floor(
                                          std::exp(log_lo + (log_hi - log_lo) * uniform01(rng)))));
    }
    HbGroup g{Matrix(nj, cfg.K), Vector(nj)};
    for (Index i = 0; i < nj; ++i) {
      g.x(i, 0) = 1.0;
      for (Index k = 1; k < cfg.K; ++k) g.x(i, k) = standard_normal(rng);
      const double t = g.x.row(i).dot(sim.beta_true.row(j));
      g.y(i) = uniform01(rng) < sigmoid(t) ? 1.0 : 0.0;
    }
    spec.groups.push_back(std::move(g));
  }
  return sim;
}

}  // namespace mhmgt
