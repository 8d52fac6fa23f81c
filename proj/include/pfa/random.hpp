#pragma once

#include <cstdint>
#include <random>

namespace pfa {

/// SplitMix64 finalizer. Used to derive independent stream seeds from
/// (base seed, stream index) pairs so every noise row, trial and c-grid run
/// can be regenerated on its own.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) noexcept {
  return mix_seed(mix_seed(seed, a), b);
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream) { return Rng(mix_seed(seed, stream)); }

}  // namespace pfa
