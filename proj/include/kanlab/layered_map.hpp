#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kanlab/skew_map.hpp"

namespace kanlab {

enum class Stage { F0, F1, F };

const char* stage_name(Stage s);

// Local surgery data.  The deformation at each hole is
//   (u,s,w) -> (u, s + delta_da * theta(r) * sigma(s), w),  r = |(u,s,w)|,
// with sigma(s) = s0 tanh(s/s0) and theta a radial cutoff, 1 on [0,inner]
// and 0 from outer.  s0 and the cutoff slope are coupled: the map stays a
// diffeomorphism only while delta_da * max|theta'| * s0 stays below 1.
struct DAParams {
    double eps = 0.02;
    double delta_da = 12.0;
    double s0 = 9.0e-4;
    double theta_inner = 0.002;
    double theta_outer = 0.02;
    double zeta = 0.016;
    double cutoff_lambda = 0.6;
};

DAParams default_da_params(double eps);

// Vertical push: p -> p + delta * eta(r) * e_t with eta = 1 on B_inner and
// 0 outside B_outer.
struct PushParams {
    double delta = 0.0025;
    double inner = 0.005;
    double outer = 0.01;
    double cutoff_lambda = 0.6;
};

PushParams default_push_params(double eps);

struct LayeredMap {
    SkewMap skew;
    Stage stage = Stage::F0;
    std::optional<DAParams> da;
    std::optional<PushParams> push;
    std::vector<Point3> holes; // hole i over the saddle-node base point, on circle i

    double theta_slope_max = 0.0; // measured max |theta'|
    double eta_slope_max = 0.0;   // measured max |eta'|

    Point3 apply(Point3 p, Mat3* jacobian = nullptr) const;

    // cutoff value/derivative at radius r
    double theta(double r) const;
    double theta_prime(double r) const;
    double eta(double r) const;
    double eta_prime(double r) const;

    Chart hole_chart(int i) const { return Chart::at(skew.base, holes[static_cast<std::size_t>(i)]); }

    // circle index of the hole ball containing p, or -1
    int hole_containing(Point3 p, double radius) const;
};

LayeredMap make_layered(const SkewMap& skew, std::optional<DAParams> da,
                        std::optional<PushParams> push, Stage stage);

// In-torus fixed points of the s-axis return map through one hole.
struct AxisFixedPoint {
    double s = 0.0;
    double derivative = 0.0;
    bool attracting = false;
};

std::vector<AxisFixedPoint> scan_saddle_structure(const LayeredMap& map, int hole);

// |det| of the Jacobian restricted to the invariant plane span(v_s, e_t).
double cs_area_jacobian(const LayeredMap& map, Point3 p);

struct ConeReport {
    double aperture = 0.0;
    double min_growth = 0.0;
    double max_aperture_out = 0.0;     // worst image aperture of the tested cone
    double invariant_aperture = 0.0;   // smallest self-consistent constant aperture found
    double domination_ratio = 0.0;     // max cs-expansion / lambda_u per step
    bool growth_pass = false;
    bool invariant_found = false;
};

ConeReport cone_check(const LayeredMap& map, int samples, double aperture, std::uint64_t seed);

struct SurgeryReport {
    int samples = 0;
    PropertyCheck leaf_preservation;   // u-displacement of the surgery step
    PropertyCheck torus_invariance;    // circles stay fixed, hole fiber untouched
    ConeReport cone;
    PropertyCheck cone_growth;
    double slab_cross_length = 0.0;    // max observed first-crossing length of 2eps-stable slabs
    double band_climb_length = 0.0;    // min observed tangent-curve length joining tori collars
    bool climb_not_shorter = false;    // band_climb_length >= slab_cross_length
    PropertyCheck hole_saddles;        // 3 axis fixed points, source rate, saddles off B_{eps/2}
    double source_rate = 0.0;          // measured axis derivative at the hole
    double saddle_abs_s = 0.0;         // |s| of the saddle pair (worst over holes)
    PropertyCheck area_outside;        // cs-area <= 1/2 outside the zeta balls
    double outside_factor = 0.0;
    double max_dilatation = 0.0;       // global cs-area sup (1 + xi)
    double suggested_zeta = 0.0;       // measured radius beyond which the 1/2 bound held
    bool pass = false;

    std::string to_text() const;
};

SurgeryReport validate_surgery(const LayeredMap& map, int samples, std::uint64_t seed);

struct EscapeReport {
    int samples_per_hole = 0;
    int max_iters = 0;
    bool all_escaped = false;
    int max_exit_steps = 0;       // slowest escape from B_{eps/2} over random starts
    int center_exit_steps = 0;    // the hole centers themselves (the slow outflow axis)
    int zeta_residence_max = 0;   // N0: longest stay inside one zeta ball, random starts
    int distinct_gap_observed = -1; // shortest observed travel between distinct zeta balls
    double fiber_step_bound = 0.0;  // sup of one-step fiber displacement
    int gap_floor = 0;              // certified N1: (1/k - 2 zeta) / fiber_step_bound
    PropertyCheck leaf_preservation;
    PropertyCheck cone_growth;
    std::string witness;
    bool pass = false;

    std::string to_text() const;
};

EscapeReport validate_escape(const LayeredMap& map, int samples, std::uint64_t seed, int max_iters);

struct CertificateReport {
    int N0 = 0;
    int N1 = 0;
    double max_dilatation = 0.0;
    double outside_factor = 0.0;
    double log_product = 0.0;
    double product = 0.0;
    bool pass = false;

    std::string to_text() const;
};

CertificateReport volume_certificate(const LayeredMap& map, int N0, int N1, int samples,
                                     std::uint64_t seed);

} // namespace kanlab
