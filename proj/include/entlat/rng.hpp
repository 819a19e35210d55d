#pragma once

#include <cstdint>
#include <random>

namespace entlat {

// Seed handling: ensembles hand every realization its own child seed,
// derived statelessly from (master seed, realization index) with the
// splitmix64 output function. Realization streams are then mt19937_64
// seeded with that child seed, so any realization can be reproduced in
// isolation from its seed alone.

inline std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ull;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBull;
    x ^= x >> 31;
    return x;
}

inline std::uint64_t child_seed(std::uint64_t master_seed, std::uint64_t index) {
    return mix64(master_seed + (index + 1) * 0x9E3779B97F4A7C15ull);
}

// 53-bit uniform in [0, 1). Hand-rolled so draws are identical across
// standard library implementations.
inline double uniform_unit(std::mt19937_64& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

inline double uniform_in(std::mt19937_64& eng, double lo, double hi) {
    return lo + uniform_unit(eng) * (hi - lo);
}

} // namespace entlat
