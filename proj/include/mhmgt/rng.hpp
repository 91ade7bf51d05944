#pragma once

#include <cstdint>
#include <random>

namespace mhmgt {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of child stream `stream` derived from a root seed. Children of the
/// same root are decorrelated; the mapping is fixed so runs reproduce.
constexpr std::uint64_t child_seed(std::uint64_t root,
                                   std::uint64_t stream) noexcept {
  return mix64(mix64(root) ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

inline Rng make_rng(std::uint64_t root, std::uint64_t stream) {
  return Rng(child_seed(root, stream));
}

inline double standard_normal(Rng& rng) {
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace mhmgt
