#pragma once

#include <cstdint>
#include <random>

namespace cotrain {

using Rng = std::mt19937_64;

/// Mixes a base seed with a stream tag (splitmix64 finalizer) so that
/// sub-seeds for bundles, views and splits are decorrelated.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) noexcept {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (tag + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace cotrain
