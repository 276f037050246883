#pragma once

#include <cstdint>

namespace qerest {

/// Stream identifiers for child seeds. Every stochastic component draws from
/// derive_seed(master, stream, index), so any sub-experiment can be rerun on its own.
enum class SeedStream : std::uint64_t {
    basis_jitter = 1,
    interior_cloud = 2,
    flow_samples = 3,
    birkhoff = 4,
};

/// SplitMix64 finaliser.
std::uint64_t splitmix64(std::uint64_t x);

/// child = splitmix64(splitmix64(master + stream) + index)
std::uint64_t derive_seed(std::uint64_t master, SeedStream stream, std::uint64_t index);

} // namespace qerest
