#pragma once

// splitmix64: tiny 64-bit generator with cheap stream splitting by seed
// offsets; used for reproducible simulation and optimizer draws.

#include <cstdint>

namespace fcl {

struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t s) : state(s) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in the open interval (0,1).
    double uniform() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

    // Uniform integer in {0, ..., n-1} (n small; modulo bias negligible).
    std::uint64_t below(std::uint64_t n) { return next() % n; }
};

// Derived stream for substream index i (golden-gamma offset).
inline SplitMix64 split_stream(std::uint64_t seed, std::uint64_t i) {
    return SplitMix64(seed + i * 0x9E3779B97F4A7C15ULL);
}

} // namespace fcl
