#pragma once

#include <cstdint>

namespace kanlab {

// SplitMix64: cheap, deterministic across platforms, and good enough for
// sampling points on a torus.  Streams for parallel work are derived from
// (seed, index) so results never depend on scheduling.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // uniform in [0,1)
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in [lo, hi)
    double next_in(double lo, double hi) { return lo + (hi - lo) * next_unit(); }
};

inline SplitMix64 stream_rng(std::uint64_t seed, std::uint64_t index) {
    SplitMix64 mix(seed ^ (0x9E3779B97F4A7C15ull * (index + 1)));
    mix.next_u64();
    return mix;
}

} // namespace kanlab
