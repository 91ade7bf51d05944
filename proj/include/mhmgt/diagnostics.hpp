#pragma once

#include <cstddef>
#include <span>

#include "mhmgt/model.hpp"
#include "mhmgt/rng.hpp"
#include "mhmgt/trace.hpp"

namespace mhmgt {

struct EssEstimate {
  double ess = 0.0;
  bool degenerate = false;  // zero-variance series
};

/// Geyer's initial monotone positive-sequence estimator on the biased sample
/// autocovariances. Requires at least 10 finite values. Clamped to (0, 1.5n].
EssEstimate effective_size(std::span<const double> series);

Vector ess_per_dim(const Matrix& samples);

/// Monte Carlo standard error of the mean, sd / sqrt(ESS).
double mcse(std::span<const double> series);

struct CalibrationProfile {
  double seconds_per_value_eval = 0.0;
  std::size_t n_reps = 0;
};

/// Median wall time of one value-only evaluation at jittered probe points.
CalibrationProfile calibrate(const DifferentiableTarget& target,
                             const Vector& probe, std::size_t n_reps, Rng& rng);

struct FeeReport {
  double total = 0.0;       // function evaluation equivalents, whole run
  double per_sample = 0.0;  // total / n
  EvalCost counters;
};

/// Sampling-phase wall time in units of calibrated value evaluations.
FeeReport fee(const ChainTrace& trace, const CalibrationProfile& calib);

struct EfficiencyReport {
  double fee_per_nominal = 0.0;
  double effective_sampling_rate = 0.0;  // mean ESS / n
  double fee_per_effective = 0.0;
  Vector ess_per_dim;

  /// fee_per_effective is computed as fee_per_nominal / effective_sampling_rate.
  static EfficiencyReport make(double fee_per_nominal, double sampling_rate,
                               Vector ess_per_dim = {});
};

EfficiencyReport efficiency(const ChainTrace& trace,
                            const CalibrationProfile& calib);

/// Newton iteration from `start` until |f'| < 1e-10 and the step is
/// negligible. Throws ModeNotFound on divergence or non-concavity.
double find_mode(const DifferentiableTarget& target, double start = 0.0);

/// η₀ = |f'''(μ₀)| · (-f''(μ₀))^(-3/2) at the mode μ₀.
double mixing_index(const UnivariateTargetWithThird& target, double start = 0.0);

}  // namespace mhmgt
