#include "kanlab/skew_map.hpp"

#include <sstream>

#include "kanlab/rng.hpp"

namespace kanlab {

SkewMap make_skew_map(const AnosovBase& A, const FiberProfile& profile) {
    return SkewMap{A, profile};
}

FiberEval SkewMap::fiber(int interval, double tau, Point2 x, bool want_grad) const {
    const FiberProfile& pr = profile;
    const double k = static_cast<double>(pr.k);
    FieldValues f = eval_fields(pr, interval, x, want_grad);
    double dt_lo = tau / k;
    double dt_hi = (tau - 1.0) / k;
    double e_lo = std::expm1(f.g_lo);
    double e_hi = std::expm1(f.g_hi);

    FiberEval out;
    if (tau <= pr.windows.mid_start) {
        // mu_L == 1 exactly, others vanish
        out.delta = e_lo * dt_lo + f.sn_lo * k * dt_lo * dt_lo;
        out.d_dt = e_lo + 2.0 * f.sn_lo * k * dt_lo;
        if (want_grad)
            out.d_dx = f.grad_g_lo * ((e_lo + 1.0) * dt_lo) + f.grad_sn_lo * (k * dt_lo * dt_lo);
        return out;
    }
    if (tau >= pr.windows.mid_end) {
        out.delta = e_hi * dt_hi + f.sn_hi * k * dt_hi * dt_hi;
        out.d_dt = e_hi + 2.0 * f.sn_hi * k * dt_hi;
        if (want_grad)
            out.d_dx = f.grad_g_hi * ((e_hi + 1.0) * dt_hi) + f.grad_sn_hi * (k * dt_hi * dt_hi);
        return out;
    }

    WindowEval w = pr.windows_at(tau);
    double lo_term = e_lo * dt_lo + f.sn_lo * k * dt_lo * dt_lo;
    double hi_term = e_hi * dt_hi + f.sn_hi * k * dt_hi * dt_hi;
    out.delta = w.mu_l * lo_term + w.mu_r * hi_term + w.mu_m * f.drift;
    out.d_dt = k * w.dmu_l * lo_term + w.mu_l * (e_lo + 2.0 * f.sn_lo * k * dt_lo) +
               k * w.dmu_r * hi_term + w.mu_r * (e_hi + 2.0 * f.sn_hi * k * dt_hi) +
               k * w.dmu_m * f.drift;
    if (want_grad) {
        Vec2 glo = f.grad_g_lo * ((e_lo + 1.0) * dt_lo) + f.grad_sn_lo * (k * dt_lo * dt_lo);
        Vec2 ghi = f.grad_g_hi * ((e_hi + 1.0) * dt_hi) + f.grad_sn_hi * (k * dt_hi * dt_hi);
        out.d_dx = glo * w.mu_l + ghi * w.mu_r + f.grad_drift * w.mu_m;
    }
    return out;
}

Point3 SkewMap::apply(Point3 p, Mat3* jacobian) const {
    const int k = profile.k;
    double kt = k * p.t;
    int interval = static_cast<int>(kt);
    if (interval >= k) interval = k - 1; // p.t just below 1 after rounding
    double tau = kt - interval;

    FiberEval fe = fiber(interval, tau, p.base(), jacobian != nullptr);
    Point2 bimg = apply_base(base, p.base());
    Point3 out{bimg.x1, bimg.x2, wrap_unit(p.t + fe.delta)};
    if (jacobian) {
        (*jacobian) = {{{static_cast<double>(base.a), static_cast<double>(base.b), 0.0},
                        {static_cast<double>(base.c), static_cast<double>(base.d), 0.0},
                        {fe.d_dx.x, fe.d_dx.y, 1.0 + fe.d_dt}}};
    }
    return out;
}

namespace {

std::string point_str(Point3 p) {
    std::ostringstream os;
    os << "(" << p.x1 << ", " << p.x2 << ", " << p.t << ")";
    return os.str();
}

} // namespace

SkewReport validate_skew_properties(const SkewMap& map, int samples, std::uint64_t seed) {
    if (samples < 1000) fail(Errc::bad_parameter, "validate_skew_properties: samples must be >= 1000");
    const FiberProfile& pr = map.profile;
    const int k = pr.k;
    SkewReport rep;
    rep.samples = samples;

    // invariant circles: phi_x(t_i) = t_i, i.e. Delta(x, tau=0) == 0
    {
        SplitMix64 rng = stream_rng(seed, 1);
        double worst = 0.0;
        Point3 wit{};
        for (int n = 0; n < samples; ++n) {
            Point2 x{rng.next_unit(), rng.next_unit()};
            for (int i = 0; i < k; ++i) {
                double d = std::fabs(map.fiber(i, 0.0, x, false).delta);
                if (d > worst) {
                    worst = d;
                    wit = {x.x1, x.x2, pr.circle_t(i)};
                }
            }
        }
        rep.circles_fixed.margin = worst;
        rep.circles_fixed.pass = worst <= 1e-12;
        if (!rep.circles_fixed.pass) rep.circles_fixed.witness = point_str(wit);
    }

    // derivative pinch 1/2 < phi' < 3/2
    {
        SplitMix64 rng = stream_rng(seed, 2);
        double lo = 2.0, hi = 0.0;
        Point3 wit{};
        for (int n = 0; n < samples; ++n) {
            Point2 x{rng.next_unit(), rng.next_unit()};
            double t = rng.next_unit();
            int i = static_cast<int>(k * t);
            if (i >= k) i = k - 1;
            double d = 1.0 + map.fiber(i, k * t - i, x, false).d_dt;
            if (d < lo) lo = d;
            if (d > hi) { hi = d; wit = {x.x1, x.x2, t}; }
        }
        rep.deriv_min = lo;
        rep.deriv_max = hi;
        rep.derivative_pinch.margin = std::min(lo - 0.5, 1.5 - hi);
        rep.derivative_pinch.pass = lo > 0.5 && hi < 1.5;
        if (!rep.derivative_pinch.pass) rep.derivative_pinch.witness = point_str(wit);
    }

    // sign pattern at the named points on every circle
    {
        bool ok = true;
        std::ostringstream why;
        for (int i = 0; i < k && ok; ++i) {
            auto logderiv = [&](Point2 x) { return std::log(1.0 + map.fiber(i, 0.0, x, false).d_dt); };
            double at_p = logderiv(pr.p_hat(i));
            double at_q = logderiv(pr.q_hat(i));
            double at_r1 = logderiv(pr.r_hat(i, 1));
            double at_rm = logderiv(pr.r_hat(i, -1));
            double at_r0 = logderiv(pr.r_hat(i, 0));
            if (!(at_p > 0.0 && at_r1 > 0.0 && at_q < 0.0 && at_rm < 0.0 && std::fabs(at_r0) <= 1e-12)) {
                ok = false;
                why << "circle " << i << ": log phi' = [p " << at_p << ", q " << at_q << ", r1 " << at_r1
                    << ", r-1 " << at_rm << ", r0 " << at_r0 << "]";
            }
        }
        rep.special_signs.pass = ok;
        if (!ok) rep.special_signs.witness = why.str();
    }

    // one-signed drift over the special points, sampled through the interval interior
    {
        bool ok = true;
        std::ostringstream why;
        int per = std::max(16, samples / (4 * k));
        for (int i = 0; i < k && ok; ++i) {
            struct Conn { Point2 x; int sign; const char* name; };
            const Conn conns[4] = {{pr.p_hat(i), +1, "p"},
                                   {pr.q_hat(i), -1, "q"},
                                   {pr.r_hat(i, 0), +1, "r0"},
                                   {pr.r_hat(i, 1), +1, "r1"}};
            for (const Conn& cn : conns) {
                for (int j = 0; j < per; ++j) {
                    double tau = (j + 0.5) / per;
                    double d = map.fiber(i, tau, cn.x, false).delta;
                    if (!(cn.sign > 0 ? d > 0.0 : d < 0.0)) {
                        ok = false;
                        why << "interval " << i << " over " << cn.name << " at tau " << tau
                            << ": drift " << d;
                        break;
                    }
                }
                if (!ok) break;
            }
        }
        rep.connection_drift.pass = ok;
        if (!ok) rep.connection_drift.witness = why.str();
    }

    // contraction at the circles away from the marked bumps
    {
        SplitMix64 rng = stream_rng(seed, 3);
        double out_max = -1e300, in_max = -1e300;
        Point3 wit{};
        bool ok = true;
        for (int n = 0; n < samples; ++n) {
            Point2 x{rng.next_unit(), rng.next_unit()};
            for (int i = 0; i < k; ++i) {
                double g = field_G(pr, i, x);
                bool inside = base_distance(x, pr.p_hat(i)) < pr.rho_b ||
                              base_distance(x, pr.r_hat(i, 1)) < pr.rho_b ||
                              base_distance(x, pr.r_hat(i, 0)) < pr.rho_b;
                if (inside) {
                    in_max = std::max(in_max, g);
                    if (g > pr.nu / 2.0 + 1e-12) { ok = false; wit = {x.x1, x.x2, pr.circle_t(i)}; }
                } else {
                    out_max = std::max(out_max, g);
                    if (g > -pr.nu + 1e-12) { ok = false; wit = {x.x1, x.x2, pr.circle_t(i)}; }
                }
            }
        }
        rep.outside_log_max = out_max;
        rep.inside_log_max = in_max;
        rep.contraction_outside.pass = ok;
        rep.contraction_outside.margin = -pr.nu - out_max;
        if (!ok) rep.contraction_outside.witness = point_str(wit);
    }

    rep.pass = rep.circles_fixed.pass && rep.derivative_pinch.pass && rep.special_signs.pass &&
               rep.connection_drift.pass && rep.contraction_outside.pass;
    return rep;
}

std::string SkewReport::to_text() const {
    std::ostringstream os;
    auto line = [&](const char* name, const PropertyCheck& c) {
        os << name << " = " << (c.pass ? "pass" : "FAIL");
        if (!c.witness.empty()) os << "  witness: " << c.witness;
        os << "\n";
    };
    os << "samples = " << samples << "\n";
    line("circle_invariance", circles_fixed);
    os << "derivative_range = [" << deriv_min << ", " << deriv_max << "]\n";
    line("derivative_pinch", derivative_pinch);
    line("special_point_signs", special_signs);
    line("connection_drift", connection_drift);
    os << "circle_log_deriv_outside_max = " << outside_log_max << "\n";
    os << "circle_log_deriv_inside_max = " << inside_log_max << "\n";
    line("contraction_outside_bumps", contraction_outside);
    os << "pass = " << (pass ? "true" : "false") << "\n";
    return os.str();
}

} // namespace kanlab
