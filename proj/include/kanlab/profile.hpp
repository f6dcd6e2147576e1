#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "kanlab/geometry.hpp"

namespace kanlab {

// C-infinity step 0 -> 1 on [0,1] from the exp(-lambda/tau) construction.
// lambda = 1 is the standard shape (peak slope 2); lambda = 0.6 flattens the
// peak to about 1.49, which the surgery cutoffs need for their margins.
struct Smoothstep {
    double lambda = 1.0;

    double value(double tau) const {
        if (tau <= 0.0) return 0.0;
        if (tau >= 1.0) return 1.0;
        double h0 = std::exp(-lambda / tau);
        double h1 = std::exp(-lambda / (1.0 - tau));
        return h0 / (h0 + h1);
    }

    double derivative(double tau) const {
        if (tau <= 0.0 || tau >= 1.0) return 0.0;
        double h0 = std::exp(-lambda / tau);
        double h1 = std::exp(-lambda / (1.0 - tau));
        double g0 = h0 * lambda / (tau * tau);
        double g1 = h1 * lambda / ((1.0 - tau) * (1.0 - tau));
        double s = h0 + h1;
        return (g0 * h1 + h0 * g1) / (s * s);
    }

    double max_slope() const;
};

// Radial C-infinity bump of radius rho: value 1 at the center, 0 outside.
// Works on squared distances so gradients never divide by r.
struct RadialBump {
    double rho = 0.0;

    double value_sq(double dist_sq) const {
        double y2 = dist_sq / (rho * rho);
        if (y2 >= 1.0) return 0.0;
        return std::exp(1.0 - 1.0 / (1.0 - y2));
    }

    // d(value)/d(dist_sq)
    double deriv_sq(double dist_sq) const {
        double y2 = dist_sq / (rho * rho);
        if (y2 >= 1.0) return 0.0;
        double denom = 1.0 - y2;
        double v = std::exp(1.0 - 1.0 / denom);
        return -v / (denom * denom * rho * rho);
    }
};

// Interval windows: mu_L holds 1 near the lower circle, mu_R near the upper,
// mu_M carries the mid-interval drift.  Plateau/support edges in tau units.
struct WindowPartition {
    double left_hold = 0.25, left_end = 0.4;
    double mid_start = 0.2, mid_hold_lo = 0.35, mid_hold_hi = 0.65, mid_end = 0.8;
    double right_start = 0.6, right_hold = 0.75;
};

struct WindowEval {
    double mu_l, mu_r, mu_m;
    double dmu_l, dmu_r, dmu_m; // d/d tau
};

// The five special base points and their per-interval field coefficients.
// Chains are pure index arithmetic: over circle i the expanding points are
// a[i%2] and b[i%3], the saddle-node point is b[(i-1)%3]; the interval drift
// is +u at a[i%2], b[(i-1)%3], b[i%3] and -u at a[(i+1)%2].
struct FiberProfile {
    int k = 6;
    Point2 a0, a1;
    Point2 b0, b1, b2;
    double nu = 0.1;
    double g_plus = 0.05;
    double u_plus = 0.002;
    double rho_b = 0.04;
    WindowPartition windows;
    Smoothstep window_step{1.0};

    // per-center coefficients for one interval
    struct IntervalCoeffs {
        // order: a0, a1, b0, b1, b2
        std::array<double, 5> g_lo{};   // into G_i
        std::array<double, 5> g_hi{};   // into G_{i+1}
        std::array<double, 5> drift{};  // into U_i
        std::array<double, 5> sn_lo{};  // quadratic saddle-node term at circle i
        std::array<double, 5> sn_hi{};  // quadratic saddle-node term at circle i+1
    };

    std::array<Point2, 5> centers{};
    std::vector<IntervalCoeffs> coeffs; // size k

    Point2 p_hat(int i) const { return (i % 2 + 2) % 2 == 0 ? a0 : a1; }
    Point2 q_hat(int i) const { return (i % 2 + 2) % 2 == 0 ? a1 : a0; }
    Point2 r_hat(int i, int which) const {
        // which in {-1, 0, 1}
        int idx = ((i + which - 1) % 3 + 3) % 3;
        return idx == 0 ? b0 : (idx == 1 ? b1 : b2);
    }

    double circle_t(int i) const { return static_cast<double>(i) / k; }
    double min_special_distance() const;

    WindowEval windows_at(double tau) const;
};

FiberProfile make_profile(const AnosovBase& A, int k, const std::array<int, 5>& special_indices,
                          double nu, double g_plus, double u_plus, double rho_b);

// Field values over one interval: log-derivative fields at both bounding
// circles, the drift field, and the saddle-node quadratic amplitudes.
struct FieldValues {
    double g_lo = 0.0, g_hi = 0.0; // G_i(x), G_{i+1}(x)
    double drift = 0.0;            // U_i(x)
    double sn_lo = 0.0, sn_hi = 0.0;
    Vec2 grad_g_lo{}, grad_g_hi{}, grad_drift{}, grad_sn_lo{}, grad_sn_hi{};
};

FieldValues eval_fields(const FiberProfile& prof, int interval, Point2 x, bool want_grad);

double field_G(const FiberProfile& prof, int circle, Point2 x);
double field_U(const FiberProfile& prof, int interval, Point2 x);

} // namespace kanlab
