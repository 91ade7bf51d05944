#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>

#include "mhmgt/model.hpp"
#include "mhmgt/rng.hpp"
#include "mhmgt/trace.hpp"

namespace mhmgt {

struct SliceConfig {
  double width = 1.0;
  int max_stepout = 10;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Shrink iterations allowed before a slice update is declared failed.
inline constexpr int kMaxShrinks = 1000;

struct SliceStep {
  double x = 0.0;
  double log_density = 0.0;  // logf at the new point
  std::size_t n_evals = 0;
};

/// One univariate slice update with stepout then shrinkage. `logf_x` is the
/// log-density at x when already known; otherwise it is evaluated and counted.
SliceStep slice_step_1d(const std::function<double(double)>& logf, double x,
                        const SliceConfig& cfg, Rng& rng,
                        std::optional<double> logf_x = std::nullopt);

/// Updates every coordinate of x in order. `log_density` holds the target's
/// value at x on entry and is kept current. Uses value-only evaluations.
void slice_sweep(const DifferentiableTarget& target, Vector& x,
                 double& log_density, const SliceConfig& cfg, Rng& rng,
                 EvalCost& cost);

/// Coordinate-wise slice Gibbs chain.
ChainTrace slice_gibbs_chain(const DifferentiableTarget& target,
                             const Vector& x0, std::size_t n_burnin,
                             std::size_t n_samples, const SliceConfig& cfg,
                             Rng& rng);

}  // namespace mhmgt
