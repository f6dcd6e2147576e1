#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "kanlab/basin.hpp"

namespace kanlab {

// Flat key = value run configuration.  Derived parameters (s0, cutoff radii,
// zeta, push sizes, t_tol) accept "auto" and are resolved from eps / k.
struct RunConfig {
    int matrix_a = 8, matrix_b = 7, matrix_c = 1, matrix_d = 1;
    int k = 6;
    std::array<int, 5> special_indices{0, 1, 2, 3, 4};
    double nu = 0.1, g_plus = 0.05, u_plus = 0.002, rho_b = 0.04;

    double eps = 0.02;
    double delta_da = 12.0;
    double s0 = -1.0;          // auto: 0.045 * eps
    double theta_inner = -1.0; // auto: 0.1 * eps
    double theta_outer = -1.0; // auto: eps
    double zeta = -1.0;        // auto: 0.8 * eps
    double delta = -1.0;       // auto: eps / 8
    double push_inner = -1.0;  // auto: eps / 4
    double push_outer = -1.0;  // auto: eps / 2

    std::string stage = "f";

    int classify_n_transient = 20000;
    int classify_window = 2000;
    double classify_majority = 0.9;
    double classify_t_tol = -1.0; // auto: 1/(4k)
    int classify_n_max = 200000;

    std::string sweep_kind = "slice"; // slice | box3
    std::string slice_kind = "fix_base1";
    double slice_fixed = 0.5;
    double slice_r1_lo = 0.0, slice_r1_hi = 1.0;
    double slice_r2_lo = 0.0, slice_r2_hi = 1.0;
    int slice_w = 256, slice_h = 256;
    double slice_jitter = 0.0;
    int box_n1 = 64, box_n2 = 64, box_n3 = 64;

    int validate_samples = 10000;
    long long lyap_n = 1000000;
    int lyap_reorth = 5;
    int lyap_points = 10;
    long long probe_iters = 20000;
    int probe_points = 200;
    double probe_min_fraction = 0.99;
    int escape_samples = 10000;
    int escape_max_iters = 2000;
    std::vector<int> intermingle_scales{4, 8, 16};
    double intermingle_min_fraction = 0.01;

    std::uint64_t seed = 12345;
    int workers = 2;
    std::string out_dir = "out";
};

RunConfig parse_config_file(const std::string& path);
void apply_override(RunConfig& cfg, const std::string& key_eq_value);
void validate_config(const RunConfig& cfg);

std::string canonical_dump(const RunConfig& cfg);
std::uint64_t config_fingerprint(const RunConfig& cfg);

AnosovBase build_anosov(const RunConfig& cfg);
FiberProfile build_profile(const RunConfig& cfg, const AnosovBase& A);
Stage parse_stage(const std::string& name);
LayeredMap build_map(const RunConfig& cfg, Stage stage);
LayeredMap build_map(const RunConfig& cfg); // cfg.stage
ClassifyParams build_classify(const RunConfig& cfg);
SliceSpec build_slice(const RunConfig& cfg);

std::uint64_t fnv1a64(const std::string& s);

} // namespace kanlab
