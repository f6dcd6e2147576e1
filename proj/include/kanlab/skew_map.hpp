#pragma once

#include <cstdint>
#include <string>

#include "kanlab/mat3.hpp"
#include "kanlab/profile.hpp"

namespace kanlab {

// Fiber displacement Delta(x, t) on one interval, with derivatives.
struct FiberEval {
    double delta = 0.0;
    double d_dt = 0.0;
    Vec2 d_dx{};
};

// The glued skew product over the Anosov base: (x,t) -> (A x, t + Delta(x,t)).
struct SkewMap {
    AnosovBase base;
    FiberProfile profile;

    // Delta on interval `i` at local coordinate tau = k (t - t_i).
    // tau may step slightly outside [0,1]; the windows extend smoothly.
    FiberEval fiber(int interval, double tau, Point2 x, bool want_grad) const;

    Point3 apply(Point3 p, Mat3* jacobian = nullptr) const;
};

SkewMap make_skew_map(const AnosovBase& A, const FiberProfile& profile);

struct PropertyCheck {
    bool pass = true;
    double margin = 0.0;   // worst observed margin (sign convention per check)
    std::string witness;   // set when the check fails
};

struct SkewReport {
    int samples = 0;
    PropertyCheck circles_fixed;       // invariant circles, max |phi(t_i) - t_i|
    PropertyCheck derivative_pinch;    // 1/2 < phi' < 3/2, margins = observed range
    double deriv_min = 0.0, deriv_max = 0.0;
    PropertyCheck special_signs;       // expanding/contracting/saddle-node pattern
    PropertyCheck connection_drift;    // one-signed drift over the special points
    PropertyCheck contraction_outside; // log phi'(t_i) <= -nu off the bumps, <= nu/2 on them
    double outside_log_max = 0.0, inside_log_max = 0.0;
    bool pass = false;

    std::string to_text() const;
};

SkewReport validate_skew_properties(const SkewMap& map, int samples, std::uint64_t seed);

} // namespace kanlab
