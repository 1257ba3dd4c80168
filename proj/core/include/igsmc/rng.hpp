#pragma once

#include <cstdint>
#include <random>

namespace igsmc {

using Rng = std::mt19937_64;

// Stream identifiers that never collide with a particle index.
inline constexpr std::uint64_t kResampleStream = 0xFFFF'FFFF'0000'0001ULL;
inline constexpr std::uint64_t kKernelSetupStream = 0xFFFF'FFFF'0000'0002ULL;

/// Mixes (seed, a, b) into a well-spread 64-bit key (splitmix64 finaliser
/// applied in a chain), so that neighbouring indices give unrelated streams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

/// Independent generator for (global seed, population, particle). Every
/// particle move draws only from its own stream, so results do not depend
/// on thread scheduling.
Rng make_stream(std::uint64_t seed, std::uint64_t population, std::uint64_t index);

}  // namespace igsmc
