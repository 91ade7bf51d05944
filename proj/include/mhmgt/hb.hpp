#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mhmgt/model.hpp"
#include "mhmgt/rng.hpp"
#include "mhmgt/slice.hpp"

namespace mhmgt {

// Hierarchical Bayesian logistic regression
//
//   y_i   ~ Bern(σ(x_iᵀ β_{j[i]}))
//   β_jk  ~ N(z_jᵀ γ_k, 1/τ_k)        (diagonal Σ)
//   γ_k   ~ N(0, 1/λ · I)
//   τ_k   ~ Gamma(a, b)               (shape, rate)

struct HbGroup {
  Matrix x;  // N_j × K
  Vector y;  // N_j, binary
};

struct HbModelSpec {
  std::vector<HbGroup> groups;
  Matrix z;                   // J × L
  double gamma_shape = 0.001; // a
  double gamma_rate = 0.001;  // b
  double gamma_precision = 1e-4;  // λ, prior precision of each γ_k entry

  Index J() const noexcept { return static_cast<Index>(groups.size()); }
  Index K() const { return groups.empty() ? 0 : groups.front().x.cols(); }
  Index L() const noexcept { return z.cols(); }
  void validate() const;
};

enum class BetaSampler { MgtBlocks, Slice };

struct HbConfig {
  std::size_t n_burnin = 500;
  std::size_t n_newton = 250;
  std::size_t n_samples = 500;
  Index block_size = 5;
  BetaSampler sampler = BetaSampler::MgtBlocks;
  SliceConfig slice;
};

struct HbTrace {
  Matrix beta;   // n × (J·K); column j·K + k
  Matrix gamma;  // n × (L·K); column l·K + k
  Matrix tau;    // n × K
  double beta_wall_time = 0.0;  // seconds in β updates, sampling phase only
  EvalCost beta_cost;
  std::size_t hessian_failures = 0;
  std::size_t block_steps = 0;
  std::size_t block_accepts = 0;
};

/// Systematic-scan Gibbs: β blocks group-major, then γ, then τ.
HbTrace hb_gibbs(const HbModelSpec& spec, const HbConfig& cfg, Rng& rng);

/// Conjugate draw of γ_k given column k of β (length J) and τ_k.
Vector draw_gamma_column(const Matrix& z, const Vector& beta_k, double tau_k,
                         double lambda, Rng& rng);

/// Conjugate draw of τ_k: Gamma(a + J/2, b + ss/2) with ss the residual sum
/// of squares of β_{·k} around Zγ_k.
double draw_tau(double shape, double rate, Index groups, double ss, Rng& rng);

struct HbSimulatorConfig {
  Index J = 5;
  Index K = 10;
  Index L = 2;
  /// Group sizes are log-uniform on [n_min, n_max].
  Index n_min = 400;
  Index n_max = 400;
  double gamma_sd = 0.5;
  double beta_sd = 0.5;
};

struct HbSimulation {
  HbModelSpec spec;
  Matrix beta_true;   // J × K
  Matrix gamma_true;  // L × K
};

HbSimulation simulate_hb(const HbSimulatorConfig& cfg, Rng& rng);

}  // namespace mhmgt
