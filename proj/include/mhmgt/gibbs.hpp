#pragma once

#include <cstddef>
#include <vector>

#include "mhmgt/mgt.hpp"
#include "mhmgt/model.hpp"
#include "mhmgt/trace.hpp"

namespace mhmgt {

/// Ordered disjoint index blocks covering 0..dim-1.
class BlockPartition {
 public:
  BlockPartition(std::vector<std::vector<Index>> blocks, Index dim);

  /// Contiguous runs of `size` in declaration order; the last may be shorter.
  static BlockPartition contiguous(Index dim, Index size = 5);
  static BlockPartition single(Index dim) { return contiguous(dim, dim); }

  Index dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return blocks_.size(); }
  const std::vector<Index>& block(std::size_t b) const { return blocks_[b]; }
  const std::vector<std::vector<Index>>& blocks() const noexcept {
    return blocks_;
  }

 private:
  std::vector<std::vector<Index>> blocks_;
  Index dim_;
};

/// Parent restricted to `block`, with every other coordinate frozen at the
/// values in `current_full`. Non-owning: the parent must outlive it.
class ConditionalTarget final : public DifferentiableTarget {
 public:
  ConditionalTarget(const DifferentiableTarget& parent, std::vector<Index> block,
                    Vector current_full);

  Index dim() const override { return static_cast<Index>(block_.size()); }
  EvalResult evaluate(const Vector& b, Order order) const override;

  Vector splice(const Vector& b) const;
  Vector restrict(const Vector& full) const;
  const std::vector<Index>& block() const noexcept { return block_; }

 private:
  const DifferentiableTarget& parent_;
  std::vector<Index> block_;
  Vector frozen_;
};

enum class SweepMode { Sample, Newton };

struct BlockRecord {
  bool accepted = false;
  double log_ratio = 0.0;
  EvalCost cost;
  bool hessian_failure = false;
};

struct SweepResult {
  Vector x;
  std::vector<BlockRecord> blocks;
  EvalCost cost;
  std::size_t hessian_failures = 0;
};

/// Applies one MH-MGT step (or Newton step) to each block's conditional in
/// partition order. Coordinates outside the visited block are untouched.
SweepResult block_mgt_sweep(const DifferentiableTarget& parent,
                            const BlockPartition& partition, const Vector& x,
                            Rng& rng, SweepMode mode = SweepMode::Sample);

/// Blocked chain: n_newton Newton sweeps, remaining burn-in sweeps, then
/// n_samples recorded sweeps. A sweep counts as accepted when every block
/// accepted.
ChainTrace run_block_chain(const DifferentiableTarget& parent,
                           const BlockPartition& partition, const Vector& x0,
                           const MgtConfig& cfg, Rng& rng);

}  // namespace mhmgt
