#pragma once

#include <cmath>
#include <cstdint>

namespace stabcode {

/// Stateless counter-based random values: every draw is a pure function of
/// (seed, counters), so encoder and decoder can reproduce the same dither
/// without transmitting it, sweeps can share randomness across cells, and
/// runs are bit-reproducible.
namespace detrng {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t hash3(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ a);
    h = splitmix64(h ^ b);
    return h;
}

/// Uniform on (0, 1].
inline double uniform01(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    const std::uint64_t h = hash3(seed, a, b);
    return (static_cast<double>(h >> 11) + 1.0) * 0x1.0p-53;
}

/// Standard normal via Box-Muller on two counter draws.
inline double gaussian(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    const double u1 = uniform01(seed, a, 2 * b);
    const double u2 = uniform01(seed, a, 2 * b + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace detrng

}  // namespace stabcode
