#pragma once

// Deterministic draws on top of mt19937_64. The standard distributions are
// implementation-defined, so reproducible runs use these instead.

#include <cstdint>
#include <random>

namespace rlcolor {

using Rng = std::mt19937_64;

// Uniform in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n). Rejection-free modulo; the bias for n far below
// 2^64 is below 1e-18.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    return rng() % n;
}

} // namespace rlcolor
