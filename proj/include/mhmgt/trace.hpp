#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mhmgt/model.hpp"

namespace mhmgt {

/// Post-burn-in samples of one chain plus the bookkeeping needed for
/// efficiency accounting.
struct ChainTrace {
  Matrix samples;                       // n × dim
  std::vector<bool> accepted;           // per recorded step
  std::vector<double> log_ratio;        // per recorded step; empty for slice
  std::vector<EvalCost> cumulative_cost;  // since the start of sampling
  Matrix burnin_path;                   // states after each burn-in step
  EvalCost burnin_cost;
  EvalCost sampling_cost;
  std::size_t hessian_failures = 0;
  double wall_time = 0.0;  // seconds spent producing the recorded samples

  struct Meta {
    std::string sampler;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> config;
  } meta;

  Index size() const noexcept { return samples.rows(); }
  Index dim() const noexcept { return samples.cols(); }
  double acceptance_rate() const;
};

}  // namespace mhmgt
