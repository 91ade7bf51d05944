#include "mhmgt/slice.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "mhmgt/errors.hpp"

namespace mhmgt {

void SliceConfig::validate() const {
  if (!(width > 0.0) || !std::isfinite(width)) {
    throw std::invalid_argument("slice width must be finite and positive");
  }
  if (max_stepout < 1) throw std::invalid_argument("max_stepout must be >= 1");
}

SliceStep slice_step_1d(const std::function<double(double)>& logf, double x,
                        const SliceConfig& cfg, Rng& rng,
                        std::optional<double> logf_x) {
  SliceStep out;
  double fx;
  if (logf_x) {
    fx = *logf_x;
  } else {
    fx = logf(x);
    ++out.n_evals;
  }
  if (!std::isfinite(fx)) {
    throw SliceFailure("slice sampler started at a point with non-finite logf");
  }
  const double level = fx - std::exponential_distribution<double>(1.0)(rng);

  const double w = cfg.width;
  double left = x - w * uniform01(rng);
  double right = left + w;
  int steps_left = static_cast<int>(std::floor(cfg.max_stepout * uniform01(rng)));
  int steps_right = cfg.max_stepout - 1 - steps_left;

  auto eval = [&](double v) {
    ++out.n_evals;
    return logf(v);
  };
  while (steps_left > 0 && eval(left) > level) {
    left -= w;
    --steps_left;
  }
  while (steps_right > 0 && eval(right) > level) {
    right += w;
    --steps_right;
  }

  for (int shrink = 0; shrink < kMaxShrinks; ++shrink) {
    const double candidate = left + uniform01(rng) * (right - left);
    const double fc = eval(candidate);
    if (fc >= level) {
      out.x = candidate;
      out.log_density = fc;
      return out;
    }
    if (candidate > x) {
      right = candidate;
    } else {
      left = candidate;
    }
  }
  std::ostringstream msg;
  msg << "slice sampler found no point in the slice after " << kMaxShrinks
      << " shrinks (x=" << x << ", interval [" << left << ", " << right << "])";
  throw SliceFailure(msg.str());
}

void slice_sweep(const DifferentiableTarget& target, Vector& x,
                 double& log_density, const SliceConfig& cfg, Rng& rng,
                 EvalCost& cost) {
  for (Index k = 0; k < x.size(); ++k) {
    auto logf = [&](double v) {
      x(k) = v;
      return target.value(x);
    };
    const double start = x(k);
    const SliceStep s = slice_step_1d(logf, start, cfg, rng, log_density);
    x(k) = s.x;
    log_density = s.log_density;
    cost.n_value += s.n_evals;
  }
}

ChainTrace slice_gibbs_chain(const DifferentiableTarget& target,
                             const Vector& x0, std::size_t n_burnin,
                             std::size_t n_samples, const SliceConfig& cfg,
                             Rng& rng) {
  cfg.validate();
  require_dim(x0.size(), target.dim(), "slice_gibbs_chain start point");
  const Index dim = target.dim();

  ChainTrace trace;
  trace.meta.sampler = "slice";
  trace.meta.seed = cfg.seed;
  std::ostringstream w;
  w << cfg.width;
  trace.meta.config = {{"width", w.str()},
                       {"max_stepout", std::to_string(cfg.max_stepout)},
                       {"n_burnin", std::to_string(n_burnin)},
                       {"n_samples", std::to_string(n_samples)}};

  Vector x = x0;
  double fx = target.value(x);
  trace.burnin_cost.n_value += 1;
  trace.burnin_path.resize(static_cast<Index>(n_burnin), dim);
  for (std::size_t k = 0; k < n_burnin; ++k) {
    slice_sweep(target, x, fx, cfg, rng, trace.burnin_cost);
    trace.burnin_path.row(static_cast<Index>(k)) = x.transpose();
  }

  const auto n = static_cast<Index>(n_samples);
  trace.samples.resize(n, dim);
  trace.accepted.assign(n_samples, true);
  trace.cumulative_cost.reserve(n_samples);
  const auto t0 = std::chrono::steady_clock::now();
  for (Index k = 0; k < n; ++k) {
    slice_sweep(target, x, fx, cfg, rng, trace.sampling_cost);
    trace.samples.row(k) = x.transpose();
    trace.cumulative_cost.push_back(trace.sampling_cost);
  }
  trace.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return trace;
}

}  // namespace mhmgt
