#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mhmgt/model.hpp"

namespace mhmgt {

enum class BaseFamily { Bernoulli, Quadratic };

const char* to_string(BaseFamily family) noexcept;

/// One randomized check of the log-concavity transfer from base densities to
/// linear-projection models.
struct TheoremInstance {
  std::vector<Index> block_sizes;  // K_j, one per design
  Index observations = 0;          // N
  BaseFamily family = BaseFamily::Bernoulli;
  std::vector<Index> deficiency;   // rank deficit planned for each X_j
  std::uint64_t seed = 0;

  Index groups() const noexcept { return static_cast<Index>(block_sizes.size()); }
  bool all_full_rank() const;
  void validate() const;
};

struct InstanceOutcome {
  TheoremInstance instance;
  WitnessReport::Kind predicted = WitnessReport::Kind::Certificate;
  WitnessReport::Kind observed = WitnessReport::Kind::Certificate;
  double assembly_rel_err = 0.0;  // block formula vs finite differences
  double qi_identity_rel_err = 0.0;
  std::optional<double> witness_rel;  // |pᵀHp| / (‖H‖ ‖p‖²)
  bool passed = false;
  std::string failure;
};

struct CampaignReport {
  std::vector<InstanceOutcome> outcomes;
  std::size_t passed() const;
  bool all_passed() const { return passed() == outcomes.size(); }
};

inline constexpr double kAssemblyTolerance = 1e-4;
inline constexpr double kIdentityTolerance = 1e-10;
inline constexpr double kWitnessTolerance = 1e-8;

/// Model realized from an instance's seed: random designs with the planned
/// rank deficits, base data, and an evaluation point.
struct RealizedInstance {
  LinearProjectionModel model;
  Vector beta;
};

RealizedInstance realize(const TheoremInstance& instance);

/// Hessian of the model value by central second differences of the value
/// alone.
Matrix finite_difference_hessian(const LinearProjectionModel& model,
                                 const Vector& beta, double step = 1e-3);

/// pᵀHp assembled observation by observation as Σ_i q_iᵀ H_i q_i with
/// q_i = (p_1ᵀx_1^i, ..., p_Jᵀx_J^i).
double projected_quadratic_form(const LinearProjectionModel& model,
                                const Vector& beta, const Vector& p);

InstanceOutcome run_instance(const TheoremInstance& instance);
CampaignReport run_campaign(const std::vector<TheoremInstance>& instances);

/// Mixed random plans: J=1 Bernoulli and J=2 quadratic bases, each design
/// full rank or deficient.
std::vector<TheoremInstance> random_instances(std::size_t count,
                                              std::uint64_t seed);

}  // namespace mhmgt
