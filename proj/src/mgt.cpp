#include "mhmgt/mgt.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mhmgt/errors.hpp"

namespace mhmgt {

double ChainTrace::acceptance_rate() const {
  if (accepted.empty()) return 0.0;
  std::size_t n = 0;
  for (bool a : accepted) n += a ? 1 : 0;
  return static_cast<double>(n) / static_cast<double>(accepted.size());
}

GaussianProposal proposal_from(const Vector& x, const EvalResult& eval) {
  if (!eval.gradient || !eval.hessian) {
    throw std::invalid_argument("proposal needs gradient and Hessian");
  }
  try {
    CholeskyFactor factor = cholesky(-*eval.hessian);
    Vector mean = x + factor.solve(*eval.gradient);
    return GaussianProposal(x, MvnDistribution(std::move(mean), std::move(factor)));
  } catch (const NotPositiveDefinite& e) {
    throw HessianNotNegativeDefinite(e);
  }
}

GaussianProposal build_proposal(const DifferentiableTarget& target,
                                const Vector& x) {
  return proposal_from(x, target.evaluate(x, Order::Hessian));
}

MgtState evaluate_state(const DifferentiableTarget& target, const Vector& x,
                        EvalCost& cost) {
  EvalResult eval = target.evaluate(x, Order::Hessian);
  cost += eval.cost;
  GaussianProposal proposal = proposal_from(x, eval);
  return MgtState{x, eval.value, std::move(proposal)};
}

MgtStepOutcome mh_transition(const DifferentiableTarget& target,
                             const MgtState& current, Vector proposed,
                             Rng& rng) {
  MgtStepRecord record;
  record.proposed = proposed;
  const double log_q_prop = current.proposal.log_q(proposed);

  std::optional<MgtState> candidate;
  try {
    candidate = evaluate_state(target, proposed, record.cost);
  } catch (const HessianNotNegativeDefinite&) {
    record.hessian_failure = true;
  }
  if (!candidate || !std::isfinite(candidate->log_density)) {
    record.log_ratio = -std::numeric_limits<double>::infinity();
    return {current, std::move(record)};
  }

  const double log_q_old = candidate->proposal.log_q(current.x);
  const double log_r = (candidate->log_density - current.log_density) +
                       (log_q_old - log_q_prop);
  record.log_ratio = log_r;
  if (log_r >= 0.0) {
    record.accepted = true;
  } else if (!std::isnan(log_r)) {
    record.accepted = uniform01(rng) < std::exp(log_r);
  }
  if (record.accepted) return {std::move(*candidate), std::move(record)};
  return {current, std::move(record)};
}

MgtStepOutcome mgt_step(const DifferentiableTarget& target, const Vector& x_old,
                        const std::optional<MgtState>& cached, Rng& rng) {
  EvalCost setup;
  const MgtState current =
      cached ? *cached : evaluate_state(target, x_old, setup);
  Vector proposed = current.proposal.dist().sample(rng);
  MgtStepOutcome out = mh_transition(target, current, std::move(proposed), rng);
  out.record.cost += setup;
  return out;
}

Vector newton_step(const DifferentiableTarget& target, const Vector& x) {
  return build_proposal(target, x).mean();
}

MgtConfig MgtConfig::with_burnin(std::size_t n_burnin, std::size_t n_samples,
                                 std::uint64_t seed) {
  return MgtConfig{n_burnin / 2, n_burnin, n_samples, seed, true};
}

void MgtConfig::validate() const {
  if (n_newton > n_burnin) {
    throw std::invalid_argument("n_newton must not exceed n_burnin");
  }
}

ChainTrace run_chain(const DifferentiableTarget& target, const Vector& x0,
                     const MgtConfig& cfg, Rng& rng) {
  cfg.validate();
  require_dim(x0.size(), target.dim(), "run_chain start point");
  const Index dim = target.dim();

  ChainTrace trace;
  trace.meta.sampler = "mh-mgt";
  trace.meta.seed = cfg.seed;
  trace.meta.config = {{"n_newton", std::to_string(cfg.n_newton)},
                       {"n_burnin", std::to_string(cfg.n_burnin)},
                       {"n_samples", std::to_string(cfg.n_samples)},
                       {"cache", cfg.cache ? "true" : "false"}};
  trace.burnin_path.resize(static_cast<Index>(cfg.n_burnin), dim);

  Vector x = x0;
  for (std::size_t k = 0; k < cfg.n_newton; ++k) {
    const MgtState s = evaluate_state(target, x, trace.burnin_cost);
    x = s.proposal.mean();
    trace.burnin_path.row(static_cast<Index>(k)) = x.transpose();
  }

  std::optional<MgtState> cache;
  auto advance = [&](EvalCost& cost) {
    MgtStepOutcome out = mgt_step(target, x, cfg.cache ? cache : std::nullopt, rng);
    cost += out.record.cost;
    if (out.record.hessian_failure) ++trace.hessian_failures;
    x = out.state.x;
    cache = std::move(out.state);
    return out.record;
  };

  for (std::size_t k = cfg.n_newton; k < cfg.n_burnin; ++k) {
    advance(trace.burnin_cost);
    trace.burnin_path.row(static_cast<Index>(k)) = x.transpose();
  }

  const auto n = static_cast<Index>(cfg.n_samples);
  trace.samples.resize(n, dim);
  trace.accepted.reserve(cfg.n_samples);
  trace.log_ratio.reserve(cfg.n_samples);
  trace.cumulative_cost.reserve(cfg.n_samples);
  const auto t0 = std::chrono::steady_clock::now();
  for (Index k = 0; k < n; ++k) {
    const MgtStepRecord rec = advance(trace.sampling_cost);
    trace.samples.row(k) = x.transpose();
    trace.accepted.push_back(rec.accepted);
    trace.log_ratio.push_back(rec.log_ratio);
    trace.cumulative_cost.push_back(trace.sampling_cost);
  }
  trace.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return trace;
}

}  // namespace mhmgt
