#pragma once

#include <cstdint>

#include "kanlab/layered_map.hpp"

namespace kanlab {

Point3 iterate_orbit(const LayeredMap& map, Point3 p, long long n);

struct LyapunovEstimate {
    std::array<double, 3> exponents{}; // descending
    std::array<double, 3> stderrs{};
    long long iterations = 0;
};

LyapunovEstimate lyapunov_spectrum(const LayeredMap& map, Point3 p, long long n, int reorth_period,
                                   std::uint64_t seed);

// Exponents of the 2x2 cocycle restricted to the invariant plane
// span(v_s, e_t); avoids mixing with the dominant unstable direction.
struct CsExponents {
    double top = 0.0;
    double bottom = 0.0;
};

CsExponents cs_exponents(const LayeredMap& map, Point3 p, long long n);

struct DiskProbeResult {
    double fraction_negative = 0.0;
    int points = 0;
    double curve_length = 0.0;
    double worst_exponent = 0.0; // largest (least negative) sampled cs exponent
};

DiskProbeResult unstable_disk_probe(const LayeredMap& map, Point3 seed_point, int n_points,
                                    long long n_iters, std::uint64_t seed);

struct ClassifyParams {
    int n_transient = 20000;
    int window = 2000;
    double majority = 0.9;
    double t_tol = 0.0; // 0 => 1/(4k)
    int n_max = 200000;
};

// label: 0 = unresolved, 1..k = attractor at circle (label-1)
struct BasinLabel {
    int label = 0;
    int settle_time = 0;
};

BasinLabel classify_basin(const LayeredMap& map, Point3 p, const ClassifyParams& params);

} // namespace kanlab
