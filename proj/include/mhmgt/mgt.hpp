#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "mhmgt/model.hpp"
#include "mhmgt/mvn.hpp"
#include "mhmgt/rng.hpp"
#include "mhmgt/trace.hpp"

namespace mhmgt {

/// Tangent Gaussian q(.|x) = N(x - H⁻¹g, -H⁻¹) fitted at `origin`.
class GaussianProposal {
 public:
  GaussianProposal(Vector origin, MvnDistribution dist)
      : origin_(std::move(origin)), dist_(std::move(dist)) {}

  const Vector& origin() const noexcept { return origin_; }
  const MvnDistribution& dist() const noexcept { return dist_; }
  const Vector& mean() const noexcept { return dist_.mean(); }
  Matrix precision() const { return dist_.precision(); }
  double log_q(const Vector& x) const { return dist_.log_pdf(x); }

 private:
  Vector origin_;
  MvnDistribution dist_;
};

/// Builds the proposal from an evaluation that carries gradient and Hessian.
/// The Newton step is a Cholesky solve against -H.
GaussianProposal proposal_from(const Vector& x, const EvalResult& eval);

/// Throws HessianNotNegativeDefinite when -H(x) does not factor.
GaussianProposal build_proposal(const DifferentiableTarget& target,
                                const Vector& x);

/// Everything a step needs to know about its current point.
struct MgtState {
  Vector x;
  double log_density = 0.0;
  GaussianProposal proposal;
};

/// Evaluates value, gradient and Hessian at x and builds the proposal there.
MgtState evaluate_state(const DifferentiableTarget& target, const Vector& x,
                        EvalCost& cost);

struct MgtStepRecord {
  Vector proposed;
  bool accepted = false;
  /// log r; -inf when the proposal was rejected for a Hessian failure.
  double log_ratio = 0.0;
  EvalCost cost;
  bool hessian_failure = false;
};

struct MgtStepOutcome {
  MgtState state;
  MgtStepRecord record;
};

/// Steps 4-7 of the transition given an already drawn proposal point.
MgtStepOutcome mh_transition(const DifferentiableTarget& target,
                             const MgtState& current, Vector proposed,
                             Rng& rng);

/// One MH-MGT transition from x_old. A cached state, when given, must have
/// been produced at x_old and saves the evaluation there.
MgtStepOutcome mgt_step(const DifferentiableTarget& target, const Vector& x_old,
                        const std::optional<MgtState>& cached, Rng& rng);

/// Deterministic full Newton step x - H⁻¹g.
Vector newton_step(const DifferentiableTarget& target, const Vector& x);

struct MgtConfig {
  std::size_t n_newton = 0;
  std::size_t n_burnin = 0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  /// Reuse the evaluation at the current point across steps.
  bool cache = true;

  /// Newton iterations take the first half of burn-in.
  static MgtConfig with_burnin(std::size_t n_burnin, std::size_t n_samples,
                               std::uint64_t seed);
  void validate() const;
};

/// n_newton Newton steps, then the remaining burn-in as discarded MH-MGT
/// steps, then n_samples recorded steps.
ChainTrace run_chain(const DifferentiableTarget& target, const Vector& x0,
                     const MgtConfig& cfg, Rng& rng);

}  // namespace mhmgt
