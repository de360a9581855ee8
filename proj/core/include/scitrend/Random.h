#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace scitrend {

// Distribution helpers built directly on raw mt19937_64 output. The standard
// <random> distributions have implementation-defined algorithms, so using
// them would break bit-reproducibility across standard libraries.

inline double nextUniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0, 1)
}

inline double nextUniformOpen(std::mt19937_64& rng) {
    return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
}

inline double nextGaussian(std::mt19937_64& rng) {
    double u1 = nextUniformOpen(rng);
    double u2 = nextUniform(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.28318530717958647692 * u2);
}

inline double nextLaplace(std::mt19937_64& rng) {
    double u = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53 - 0.5;  // (-0.5, 0.5)
    double scale = 0.70710678118654752440;  // unit variance
    return u < 0.0 ? scale * std::log1p(2.0 * u) : -scale * std::log1p(-2.0 * u);
}

inline std::uint64_t deriveSeed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace scitrend
