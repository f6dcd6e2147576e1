#include "kanlab/profile.hpp"

#include <algorithm>
#include <string>

namespace kanlab {

double Smoothstep::max_slope() const {
    double m = 0.0;
    for (int i = 1; i < 4096; ++i) m = std::max(m, derivative(i / 4096.0));
    return m;
}

double FiberProfile::min_special_distance() const {
    std::array<Point2, 5> pts{a0, a1, b0, b1, b2};
    double m = 1.0;
    for (int i = 0; i < 5; ++i)
        for (int j = i + 1; j < 5; ++j) m = std::min(m, base_distance(pts[i], pts[j]));
    return m;
}

WindowEval FiberProfile::windows_at(double tau) const {
    const WindowPartition& w = windows;
    WindowEval e{};
    // mu_L: 1 on [0, left_hold], 0 from left_end
    {
        double span = w.left_end - w.left_hold;
        double z = (w.left_end - tau) / span;
        e.mu_l = window_step.value(z);
        e.dmu_l = -window_step.derivative(z) / span;
    }
    // mu_R: 0 until right_start, 1 from right_hold
    {
        double span = w.right_hold - w.right_start;
        double z = (tau - w.right_start) / span;
        e.mu_r = window_step.value(z);
        e.dmu_r = window_step.derivative(z) / span;
    }
    // mu_M: product of a rising and a falling step
    {
        double span_a = w.mid_hold_lo - w.mid_start;
        double span_b = w.mid_end - w.mid_hold_hi;
        double za = (tau - w.mid_start) / span_a;
        double zb = (w.mid_end - tau) / span_b;
        double va = window_step.value(za);
        double vb = window_step.value(zb);
        e.mu_m = va * vb;
        e.dmu_m = window_step.derivative(za) / span_a * vb - va * window_step.derivative(zb) / span_b;
    }
    return e;
}

FiberProfile make_profile(const AnosovBase& A, int k, const std::array<int, 5>& special_indices,
                          double nu, double g_plus, double u_plus, double rho_b) {
    if (k < 6 || k % 6 != 0)
        fail(Errc::bad_circle_count, "make_profile: k = " + std::to_string(k) + " must be a positive multiple of 6");
    if (!(nu > 0.0) || !(u_plus > 0.0) || !(rho_b > 0.0) || !(g_plus > 0.0))
        fail(Errc::bad_parameter, "make_profile: nu, g_plus, u_plus, rho_b must be positive");
    if (g_plus > nu / 2.0)
        fail(Errc::drift_height_too_large, "make_profile: g_plus exceeds nu/2");

    FiberProfile prof;
    prof.k = k;
    prof.nu = nu;
    prof.g_plus = g_plus;
    prof.u_plus = u_plus;
    prof.rho_b = rho_b;

    std::array<int, 5> idx = special_indices;
    std::array<int, 5> sorted = idx;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        fail(Errc::duplicate_special_points, "make_profile: special point indices must be distinct");
    for (int i : idx)
        if (i < 0 || i >= static_cast<int>(A.fixed_pts.size()))
            fail(Errc::bad_parameter, "make_profile: special index out of range");

    prof.a0 = A.fixed_pts[idx[0]];
    prof.a1 = A.fixed_pts[idx[1]];
    prof.b0 = A.fixed_pts[idx[2]];
    prof.b1 = A.fixed_pts[idx[3]];
    prof.b2 = A.fixed_pts[idx[4]];
    prof.centers = {prof.a0, prof.a1, prof.b0, prof.b1, prof.b2};

    double min_dist = prof.min_special_distance();
    if (!(rho_b < min_dist / 2.0))
        fail(Errc::bump_radius_too_large,
             "make_profile: rho_b = " + std::to_string(rho_b) + " >= half min special distance " +
                 std::to_string(min_dist / 2.0));

    // coefficient tables; center order a0, a1, b0, b1, b2
    prof.coeffs.resize(k);
    auto aslot = [](int i) { return ((i % 2) + 2) % 2; };          // 0 or 1
    auto bslot = [](int i) { return 2 + (((i % 3) + 3) % 3); };    // 2..4
    double ge = nu + g_plus;
    for (int i = 0; i < k; ++i) {
        auto& c = prof.coeffs[i];
        // G_i bumps: p_hat(i)=a[i%2], r1(i)=b[i%3] at height nu+g_plus; r0(i)=b[i-1] at nu
        c.g_lo[aslot(i)] += ge;
        c.g_lo[bslot(i)] += ge;
        c.g_lo[bslot(i - 1)] += nu;
        // G_{i+1}
        c.g_hi[aslot(i + 1)] += ge;
        c.g_hi[bslot(i + 1)] += ge;
        c.g_hi[bslot(i)] += nu;
        // drift U_i: up at p_hat, r0, r1; down at q_hat
        c.drift[aslot(i)] += u_plus;
        c.drift[bslot(i - 1)] += u_plus;
        c.drift[bslot(i)] += u_plus;
        c.drift[aslot(i + 1)] -= u_plus;
        // quadratic saddle-node drift, centered at the saddle-node base point
        c.sn_lo[bslot(i - 1)] += u_plus;
        c.sn_hi[bslot(i)] += u_plus;
    }
    return prof;
}

FieldValues eval_fields(const FiberProfile& prof, int interval, Point2 x, bool want_grad) {
    FieldValues f;
    f.g_lo = -prof.nu;
    f.g_hi = -prof.nu;
    const auto& c = prof.coeffs[interval];
    RadialBump bump{prof.rho_b};
    double rho_sq = prof.rho_b * prof.rho_b;
    for (int j = 0; j < 5; ++j) {
        double d1 = wrap_delta(x.x1 - prof.centers[j].x1);
        double d2 = wrap_delta(x.x2 - prof.centers[j].x2);
        double q = d1 * d1 + d2 * d2;
        if (q >= rho_sq) continue;
        double beta = bump.value_sq(q);
        f.g_lo += c.g_lo[j] * beta;
        f.g_hi += c.g_hi[j] * beta;
        f.drift += c.drift[j] * beta;
        f.sn_lo += c.sn_lo[j] * beta;
        f.sn_hi += c.sn_hi[j] * beta;
        if (want_grad) {
            double dv = bump.deriv_sq(q);
            Vec2 g{2.0 * dv * d1, 2.0 * dv * d2};
            f.grad_g_lo = f.grad_g_lo + g * c.g_lo[j];
            f.grad_g_hi = f.grad_g_hi + g * c.g_hi[j];
            f.grad_drift = f.grad_drift + g * c.drift[j];
            f.grad_sn_lo = f.grad_sn_lo + g * c.sn_lo[j];
            f.grad_sn_hi = f.grad_sn_hi + g * c.sn_hi[j];
        }
    }
    return f;
}

double field_G(const FiberProfile& prof, int circle, Point2 x) {
    return eval_fields(prof, circle, x, false).g_lo;
}

double field_U(const FiberProfile& prof, int interval, Point2 x) {
    return eval_fields(prof, interval, x, false).drift;
}

} // namespace kanlab
