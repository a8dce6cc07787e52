#pragma once

#include <cstdint>
#include <random>

namespace tcs {

using Rng = std::mt19937_64;

// Mixes a base seed with up to two stream indices (SplitMix64 finalizer), so
// replicates, train/test roles and ensemble members get decorrelated streams.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                          std::uint64_t b = 0) noexcept;

} // namespace tcs
