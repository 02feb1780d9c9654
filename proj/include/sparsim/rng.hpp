#pragma once

#include <cstdint>

namespace sparsim {

// splitmix64 finalizer; spreads one user seed into decorrelated stream seeds
// (dataset generation, model init, per-worker batch draws).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace sparsim
