#include "kanlab/layered_map.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kanlab/curve.hpp"
#include "kanlab/rng.hpp"

namespace kanlab {

const char* stage_name(Stage s) {
    switch (s) {
        case Stage::F0: return "f0";
        case Stage::F1: return "f1";
        case Stage::F: return "f";
    }
    return "?";
}

DAParams default_da_params(double eps) {
    DAParams p;
    p.eps = eps;
    p.delta_da = 12.0;
    p.s0 = 0.045 * eps;
    p.theta_inner = 0.1 * eps;
    p.theta_outer = eps;
    p.zeta = 0.8 * eps;
    return p;
}

PushParams default_push_params(double eps) {
    PushParams p;
    p.delta = eps / 8.0;
    p.inner = eps / 4.0;
    p.outer = eps / 2.0;
    return p;
}

double LayeredMap::theta(double r) const {
    const DAParams& d = *da;
    if (r <= d.theta_inner) return 1.0;
    if (r >= d.theta_outer) return 0.0;
    Smoothstep st{d.cutoff_lambda};
    return st.value((d.theta_outer - r) / (d.theta_outer - d.theta_inner));
}

double LayeredMap::theta_prime(double r) const {
    const DAParams& d = *da;
    if (r <= d.theta_inner || r >= d.theta_outer) return 0.0;
    Smoothstep st{d.cutoff_lambda};
    double span = d.theta_outer - d.theta_inner;
    return -st.derivative((d.theta_outer - r) / span) / span;
}

double LayeredMap::eta(double r) const {
    const PushParams& p = *push;
    if (r <= p.inner) return 1.0;
    if (r >= p.outer) return 0.0;
    Smoothstep st{p.cutoff_lambda};
    return st.value((p.outer - r) / (p.outer - p.inner));
}

double LayeredMap::eta_prime(double r) const {
    const PushParams& p = *push;
    if (r <= p.inner || r >= p.outer) return 0.0;
    Smoothstep st{p.cutoff_lambda};
    double span = p.outer - p.inner;
    return -st.derivative((p.outer - r) / span) / span;
}

int LayeredMap::hole_containing(Point3 p, double radius) const {
    const int k = skew.profile.k;
    int j = static_cast<int>(std::lround(static_cast<double>(k) * p.t)) % k;
    if (j < 0) j += k;
    const Point3& h = holes[static_cast<std::size_t>(j)];
    double dw = wrap_delta(p.t - h.t);
    if (std::fabs(dw) > radius) return -1;
    double dsq = base_distance_sq(p.base(), h.base()) + dw * dw;
    return dsq <= radius * radius ? j : -1;
}

namespace {

inline Vec3 embed(Vec2 v) { return {v.x, v.y, 0.0}; }

// J += col * row^T applied to the identity-relative update: J = (I + col row^T) J
inline void rank1_precompose(Mat3& J, const Vec3& col, const Vec3& row) {
    Vec3 rJ{};
    for (int j = 0; j < 3; ++j) rJ[j] = row[0] * J[0][j] + row[1] * J[1][j] + row[2] * J[2][j];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) J[i][j] += col[i] * rJ[j];
}

} // namespace

Point3 LayeredMap::apply(Point3 p, Mat3* jacobian) const {
    Point3 q = skew.apply(p, jacobian);
    if (stage == Stage::F0) return q;

    const AnosovBase& A = skew.base;
    const DAParams& d = *da;

    int j = hole_containing(q, d.theta_outer);
    if (j >= 0) {
        Chart C = hole_chart(j);
        ChartCoords c = local_chart_unchecked(C, q);
        double r = c.r();
        double th = theta(r);
        double sig = d.s0 * std::tanh(c.s / d.s0);
        double disp = d.delta_da * th * sig;
        Vec2 dbase = A.v_s * disp;
        Point3 qn{wrap_unit(q.x1 + dbase.x), wrap_unit(q.x2 + dbase.y), q.t};
        if (jacobian) {
            double sigp = 1.0 / std::cosh(c.s / d.s0);
            sigp *= sigp;
            Vec3 grad = {0, 0, 0};
            double cs = d.delta_da * th * sigp;
            grad[0] += cs * A.w_s.x;
            grad[1] += cs * A.w_s.y;
            double tp = theta_prime(r);
            if (tp != 0.0) {
                double cr = d.delta_da * tp * sig / r;
                grad[0] += cr * (c.u * A.w_u.x + c.s * A.w_s.x);
                grad[1] += cr * (c.u * A.w_u.y + c.s * A.w_s.y);
                grad[2] += cr * c.w;
            }
            rank1_precompose(*jacobian, embed(A.v_s), grad);
        }
        q = qn;
    }
    if (stage != Stage::F) return q;

    const PushParams& pu = *push;
    j = hole_containing(q, pu.outer);
    if (j >= 0) {
        Chart C = hole_chart(j);
        ChartCoords c = local_chart_unchecked(C, q);
        double r = c.r();
        double e = eta(r);
        Point3 qn{q.x1, q.x2, wrap_unit(q.t + pu.delta * e)};
        if (jacobian) {
            double ep = eta_prime(r);
            if (ep != 0.0 && r > 0.0) {
                double cr = pu.delta * ep / r;
                Vec3 grad{cr * (c.u * A.w_u.x + c.s * A.w_s.x),
                          cr * (c.u * A.w_u.y + c.s * A.w_s.y), cr * c.w};
                rank1_precompose(*jacobian, Vec3{0, 0, 1}, grad);
            }
        }
        q = qn;
    }
    return q;
}

LayeredMap make_layered(const SkewMap& skew, std::optional<DAParams> da,
                        std::optional<PushParams> push, Stage stage) {
    if (stage != Stage::F0 && !da)
        fail(Errc::bad_parameter, "make_layered: stage requires DA parameters");
    if (stage == Stage::F && !push)
        fail(Errc::bad_parameter, "make_layered: stage f requires push parameters");

    LayeredMap m;
    m.skew = skew;
    m.stage = stage;
    m.da = da;
    m.push = push;

    const FiberProfile& pr = skew.profile;
    const int k = pr.k;
    for (int i = 0; i < k; ++i) {
        Point2 b = pr.r_hat(i, 0);
        m.holes.push_back({b.x1, b.x2, pr.circle_t(i)});
    }

    if (da) {
        const DAParams& d = *da;
        double min_dist = pr.min_special_distance();
        double cap = std::min(1.0 / (2.0 * k), min_dist / 2.0);
        if (!(d.eps > 0.0) || !(d.eps < cap))
            fail(Errc::bad_parameter, "make_layered: eps must lie in (0, " + std::to_string(cap) + ")");
        if (!((1.0 + d.delta_da) * skew.base.lambda_s > 1.0))
            fail(Errc::not_a_source,
                 "make_layered: (1+delta_da)*lambda_s = " +
                     std::to_string((1.0 + d.delta_da) * skew.base.lambda_s) +
                     " <= 1, hole is not a source");
        if (!(d.theta_inner > 0.0) || !(d.theta_inner < d.theta_outer) || !(d.theta_outer <= d.eps))
            fail(Errc::bad_parameter, "make_layered: need 0 < theta_inner < theta_outer <= eps");
        if (!(d.s0 > 0.0)) fail(Errc::bad_parameter, "make_layered: s0 must be positive");
        if (!(d.zeta > 0.0) || !(d.zeta <= d.eps))
            fail(Errc::bad_parameter, "make_layered: zeta must lie in (0, eps]");
        if (!(d.eps + pr.rho_b < min_dist))
            fail(Errc::overlapping_supports,
                 "make_layered: eps-ball would reach the bump of another special point");

        Smoothstep st{d.cutoff_lambda};
        m.theta_slope_max = st.max_slope() / (d.theta_outer - d.theta_inner);
        double margin = 1.0 - d.delta_da * m.theta_slope_max * d.s0;
        if (!(margin >= 0.1))
            fail(Errc::diffeo_margin_violated,
                 "make_layered: diffeo margin " + std::to_string(margin) + " < 0.1");
    }
    if (push) {
        const PushParams& p = *push;
        const DAParams& d = *da;
        if (!(p.delta > 0.0) || !(p.delta <= d.eps / 4.0))
            fail(Errc::bad_parameter, "make_layered: need 0 < delta <= eps/4");
        if (!(p.inner > 0.0) || !(p.inner < p.outer) || !(p.outer <= d.eps / 2.0))
            fail(Errc::bad_parameter, "make_layered: need 0 < inner < outer <= eps/2");
        Smoothstep st{p.cutoff_lambda};
        m.eta_slope_max = st.max_slope() / (p.outer - p.inner);
        if (!(p.delta * m.eta_slope_max < 1.0))
            fail(Errc::diffeo_margin_violated, "make_layered: |delta * eta'| >= 1, push not invertible");
    }
    return m;
}

std::vector<AxisFixedPoint> scan_saddle_structure(const LayeredMap& map, int hole) {
    if (map.stage == Stage::F0 || !map.da)
        fail(Errc::bad_parameter, "scan_saddle_structure: needs the DA stage");
    LayeredMap m1 = map;
    m1.stage = Stage::F1;

    const double eps = map.da->eps;
    Chart C = m1.hole_chart(hole);
    Vec3 es = embed(m1.skew.base.v_s);
    Vec2 ws = m1.skew.base.w_s;

    auto image_s = [&](double s) {
        Point3 p = chart_from(C, {0.0, s, 0.0});
        Point3 q = m1.apply(p);
        return local_chart_unchecked(C, q).s;
    };
    auto deriv_s = [&](double s) {
        Point3 p = chart_from(C, {0.0, s, 0.0});
        Mat3 J;
        m1.apply(p, &J);
        Vec3 img = mat3_apply(J, es);
        return ws.x * img[0] + ws.y * img[1];
    };

    const int n = 8192;
    std::vector<AxisFixedPoint> out;
    double prev_s = -eps, prev_g = image_s(prev_s) - prev_s;
    for (int i = 1; i <= n; ++i) {
        double s = -eps + 2.0 * eps * i / n;
        double g = image_s(s) - s;
        if ((prev_g <= 0.0 && g > 0.0) || (prev_g >= 0.0 && g < 0.0) || g == 0.0) {
            double lo = prev_s, hi = s, glo = prev_g;
            for (int it = 0; it < 80; ++it) {
                double mid = 0.5 * (lo + hi);
                double gm = image_s(mid) - mid;
                if ((glo <= 0.0) == (gm <= 0.0)) { lo = mid; glo = gm; }
                else hi = mid;
            }
            double root = 0.5 * (lo + hi);
            if (out.empty() || std::fabs(root - out.back().s) > 1e-5) {
                double dv = deriv_s(root);
                out.push_back({root, dv, std::fabs(dv) < 1.0});
            }
        }
        prev_s = s;
        prev_g = g;
    }
    return out;
}

double cs_area_jacobian(const LayeredMap& map, Point3 p) {
    Mat3 J;
    map.apply(p, &J);
    const AnosovBase& A = map.skew.base;
    Vec3 v1 = mat3_apply(J, embed(A.v_s));
    Vec3 v2 = mat3_apply(J, Vec3{0, 0, 1});
    double a = A.w_s.x * v1[0] + A.w_s.y * v1[1];
    double b = A.w_s.x * v2[0] + A.w_s.y * v2[1];
    double c = v1[2], d = v2[2];
    return std::fabs(a * d - b * c);
}

namespace {

Point3 random_point(SplitMix64& rng) {
    return {rng.next_unit(), rng.next_unit(), rng.next_unit()};
}

Point3 random_in_ball(SplitMix64& rng, const Chart& C, double radius) {
    for (;;) {
        double u = rng.next_in(-1.0, 1.0);
        double s = rng.next_in(-1.0, 1.0);
        double w = rng.next_in(-1.0, 1.0);
        if (u * u + s * s + w * w <= 1.0)
            return chart_from(C, {u * radius, s * radius, w * radius});
    }
}

struct SamplePool {
    std::vector<Point3> pts;
};

// uniform points plus stratified points around every hole
SamplePool surgery_samples(const LayeredMap& map, int samples, std::uint64_t seed, double radius) {
    SamplePool pool;
    pool.pts.reserve(static_cast<std::size_t>(samples) * 2);
    SplitMix64 rng = stream_rng(seed, 11);
    for (int i = 0; i < samples; ++i) pool.pts.push_back(random_point(rng));
    const int k = map.skew.profile.k;
    int per_hole = std::max(64, samples / k);
    for (int h = 0; h < k; ++h) {
        Chart C = map.hole_chart(h);
        SplitMix64 r2 = stream_rng(seed, 100 + static_cast<std::uint64_t>(h));
        for (int i = 0; i < per_hole; ++i) pool.pts.push_back(random_in_ball(r2, C, radius));
    }
    return pool;
}

double u_component(const AnosovBase& A, Point3 a, Point3 b) {
    Vec2 d{wrap_delta(a.x1 - b.x1), wrap_delta(a.x2 - b.x2)};
    return A.w_u.dot(d);
}

} // namespace

ConeReport cone_check(const LayeredMap& map, int samples, double aperture, std::uint64_t seed) {
    if (!(aperture > 0.0 && aperture < 1.0))
        fail(Errc::bad_parameter, "cone_check: aperture must lie in (0,1)");
    const AnosovBase& A = map.skew.base;
    Vec3 eu = embed(A.v_u), es = embed(A.v_s), et{0, 0, 1};

    double ball = map.da ? map.da->theta_outer : 0.05;
    SamplePool pool = surgery_samples(map, samples, seed, ball);

    ConeReport rep;
    rep.aperture = aperture;
    rep.min_growth = 1e300;
    rep.max_aperture_out = 0.0;
    rep.domination_ratio = 0.0;

    std::vector<double> ap_out_by_ap; // worst image aperture for each candidate aperture
    const std::vector<double> candidates = {aperture, 0.3, 0.4, 0.5, 0.6, 0.8, 1.0, 1.2, 1.5};
    ap_out_by_ap.assign(candidates.size(), 0.0);

    const int n_ang = 12;
    for (const Point3& p : pool.pts) {
        Mat3 J;
        map.apply(p, &J);
        // cs block operator norm for the domination report
        Vec3 js = mat3_apply(J, es), jt = mat3_apply(J, et);
        double a = A.w_s.x * js[0] + A.w_s.y * js[1];
        double b = A.w_s.x * jt[0] + A.w_s.y * jt[1];
        double c = js[2], d = jt[2];
        double t1 = a * a + b * b + c * c + d * d;
        double t2 = std::sqrt(std::max(0.0, t1 * t1 - 4.0 * std::pow(a * d - b * c, 2)));
        double opnorm = std::sqrt(std::max(0.0, (t1 + t2) / 2.0));
        rep.domination_ratio = std::max(rep.domination_ratio, opnorm / A.lambda_u);

        for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
            double ap = candidates[ci];
            for (int ia = 0; ia < n_ang; ++ia) {
                double phi = 2.0 * M_PI * ia / n_ang;
                Vec3 v{eu[0] + ap * (std::cos(phi) * es[0]),
                       eu[1] + ap * (std::cos(phi) * es[1]),
                       ap * std::sin(phi)};
                Vec3 w = mat3_apply(J, v);
                double wu = A.w_u.x * w[0] + A.w_u.y * w[1];
                double wsc = A.w_s.x * w[0] + A.w_s.y * w[1];
                double trans = std::hypot(wsc, w[2]);
                double ratio = trans / std::fabs(wu);
                ap_out_by_ap[ci] = std::max(ap_out_by_ap[ci], ratio);
                if (ci == 0) {
                    double growth = vec3_norm(w) / vec3_norm(v);
                    rep.min_growth = std::min(rep.min_growth, growth);
                }
            }
        }
    }
    rep.max_aperture_out = ap_out_by_ap[0];
    rep.growth_pass = rep.min_growth >= 3.0;
    rep.invariant_found = false;
    for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
        if (ap_out_by_ap[ci] <= candidates[ci]) {
            rep.invariant_aperture = candidates[ci];
            rep.invariant_found = true;
            break;
        }
    }
    return rep;
}

SurgeryReport validate_surgery(const LayeredMap& map, int samples, std::uint64_t seed) {
    if (map.stage != Stage::F1)
        fail(Errc::bad_parameter, "validate_surgery: map must be at stage f1");
    const AnosovBase& A = map.skew.base;
    const FiberProfile& pr = map.skew.profile;
    const DAParams& d = *map.da;
    const int k = pr.k;

    SurgeryReport rep;
    rep.samples = samples;

    LayeredMap f0 = map;
    f0.stage = Stage::F0;

    // leaf preservation: the surgery displaces along v_s only
    {
        SamplePool pool = surgery_samples(map, samples, seed, d.theta_outer * 1.2);
        double worst = 0.0;
        for (const Point3& p : pool.pts)
            worst = std::max(worst, std::fabs(u_component(A, map.apply(p), f0.apply(p))));
        rep.leaf_preservation.margin = worst;
        rep.leaf_preservation.pass = worst <= 1e-12;
    }

    // tori stay invariant, the fiber circle over each hole keeps its dynamics
    {
        SplitMix64 rng = stream_rng(seed, 21);
        double worst = 0.0;
        for (int n = 0; n < samples / 2; ++n) {
            Point2 x{rng.next_unit(), rng.next_unit()};
            int i = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(k));
            Point3 p{x.x1, x.x2, pr.circle_t(i)};
            worst = std::max(worst, std::fabs(wrap_delta(map.apply(p).t - p.t)));
        }
        for (int h = 0; h < k; ++h) {
            Point3 base = map.holes[static_cast<std::size_t>(h)];
            for (int n = 0; n < 64; ++n) {
                Point3 p{base.x1, base.x2, rng.next_unit()};
                worst = std::max(worst, torus_distance(map.apply(p), f0.apply(p)));
            }
        }
        rep.torus_invariance.margin = worst;
        rep.torus_invariance.pass = worst <= 1e-12;
    }

    rep.cone = cone_check(map, samples, 0.2, seed);
    rep.cone_growth.pass = rep.cone.growth_pass;
    rep.cone_growth.margin = rep.cone.min_growth - 3.0;

    // tangent-curve probes: first-crossing length of 2eps stable slabs, and the
    // shortest observed climb between tori collars
    {
        SplitMix64 rng = stream_rng(seed, 31);
        double cross_max = 0.0;
        for (int trial = 0; trial < 4; ++trial) {
            Point3 cseed{rng.next_unit(), rng.next_unit(),
                         pr.circle_t(trial % k) + 0.5 / k};
            UnstableCurve curve = grow_unstable_curve(map, cseed, 90.0, 2e-3, 200000);
            for (int a = 0; a < 6; ++a) {
                Point2 x{rng.next_unit(), rng.next_unit()};
                double len = curve_first_slab_crossing(curve, A, x, d.eps);
                if (len >= 0.0) cross_max = std::max(cross_max, len);
            }
        }
        rep.slab_cross_length = cross_max;

        double climb_min = 1e300;
        for (int trial = 0; trial < 4; ++trial) {
            int band = trial % k;
            Point3 cseed{rng.next_unit(), rng.next_unit(), pr.circle_t(band) + d.eps};
            UnstableCurve curve = grow_unstable_curve(map, cseed, 90.0, 2e-3, 200000);
            double len = curve_first_band_climb(curve, pr.circle_t(band), d.eps, k);
            if (len >= 0.0) climb_min = std::min(climb_min, len);
        }
        rep.band_climb_length = climb_min;
        rep.climb_not_shorter = climb_min >= cross_max;
    }

    // hole structure on the in-torus stable axis
    {
        bool ok = true;
        std::ostringstream why;
        double worst_rate = 0.0, worst_abs = 1e300;
        double expect = (1.0 + d.delta_da) * A.lambda_s;
        for (int h = 0; h < k && ok; ++h) {
            auto fps = scan_saddle_structure(map, h);
            if (fps.size() != 3) {
                ok = false;
                why << "hole " << h << ": found " << fps.size() << " axis fixed points, want 3";
                break;
            }
            const AxisFixedPoint& mid = fps[1];
            if (std::fabs(mid.s) > 1e-6 || mid.attracting) {
                ok = false;
                why << "hole " << h << ": middle fixed point at s=" << mid.s << " is not the source";
                break;
            }
            worst_rate = std::max(worst_rate, std::fabs(mid.derivative - expect));
            for (int e : {0, 2}) {
                const AxisFixedPoint& sad = fps[static_cast<std::size_t>(e)];
                worst_abs = std::min(worst_abs, std::fabs(sad.s));
                if (!sad.attracting || std::fabs(sad.s) <= d.eps / 2.0) {
                    ok = false;
                    why << "hole " << h << ": saddle at s=" << sad.s << " inside B_{eps/2} or not attracting";
                    break;
                }
            }
            if (h == 0) rep.source_rate = mid.derivative;
        }
        rep.saddle_abs_s = worst_abs;
        rep.hole_saddles.pass = ok;
        rep.hole_saddles.margin = worst_rate;
        if (!ok) rep.hole_saddles.witness = why.str();
    }

    // cs-area bounds: 1/2 outside the zeta balls, global sup reported
    {
        SplitMix64 rng = stream_rng(seed, 41);
        double out_max = 0.0, all_max = 0.0, bad_radius = 0.0;
        auto consider = [&](Point3 p) {
            double area = cs_area_jacobian(map, p);
            all_max = std::max(all_max, area);
            int inball = map.hole_containing(p, d.zeta);
            if (inball < 0) out_max = std::max(out_max, area);
            if (area > 0.5) {
                int h = map.hole_containing(p, 0.4); // generous: distance to nearest hole
                if (h >= 0)
                    bad_radius = std::max(
                        bad_radius, torus_distance(p, map.holes[static_cast<std::size_t>(h)]));
            }
        };
        for (int n = 0; n < samples; ++n) consider(random_point(rng));
        for (int h = 0; h < k; ++h) {
            Chart C = map.hole_chart(h);
            SplitMix64 r2 = stream_rng(seed, 300 + static_cast<std::uint64_t>(h));
            int per = std::max(256, samples / k);
            for (int n = 0; n < per; ++n) consider(random_in_ball(r2, C, d.zeta));
            for (int n = 0; n < per; ++n) {
                // annulus just outside the zeta ball
                for (;;) {
                    double u = r2.next_in(-1.0, 1.0), s = r2.next_in(-1.0, 1.0), w = r2.next_in(-1.0, 1.0);
                    double rr = std::sqrt(u * u + s * s + w * w);
                    if (rr > 1e-9 && rr <= 1.0) {
                        double rad = d.zeta * (1.0 + r2.next_unit() * 0.5) + 1e-12;
                        consider(chart_from(C, {u / rr * rad, s / rr * rad, w / rr * rad}));
                        break;
                    }
                }
            }
        }
        rep.outside_factor = out_max;
        rep.max_dilatation = all_max;
        rep.suggested_zeta = bad_radius > 0.0 ? bad_radius * 1.1 : 0.0;
        rep.area_outside.pass = out_max <= 0.5;
        rep.area_outside.margin = 0.5 - out_max;
    }

    rep.pass = rep.leaf_preservation.pass && rep.torus_invariance.pass && rep.cone_growth.pass &&
               rep.hole_saddles.pass && rep.area_outside.pass;
    return rep;
}

std::string SurgeryReport::to_text() const {
    std::ostringstream os;
    auto line = [&](const char* name, const PropertyCheck& c) {
        os << name << " = " << (c.pass ? "pass" : "FAIL");
        if (!c.witness.empty()) os << "  witness: " << c.witness;
        os << "\n";
    };
    os << "samples = " << samples << "\n";
    line("leaf_preservation", leaf_preservation);
    line("torus_invariance", torus_invariance);
    os << "cone_min_growth = " << cone.min_growth << "\n";
    os << "cone_aperture_out_at_0.2 = " << cone.max_aperture_out << "\n";
    os << "cone_invariant_aperture = "
       << (cone.invariant_found ? std::to_string(cone.invariant_aperture) : std::string("none")) << "\n";
    os << "cone_domination_ratio = " << cone.domination_ratio << "\n";
    line("cone_growth", cone_growth);
    os << "slab_cross_length = " << slab_cross_length << "\n";
    os << "band_climb_length = " << band_climb_length << "\n";
    os << "climb_not_shorter = " << (climb_not_shorter ? "true" : "false") << "\n";
    os << "source_rate = " << source_rate << "\n";
    os << "saddle_abs_s = " << saddle_abs_s << "\n";
    line("hole_saddles", hole_saddles);
    os << "cs_area_outside_factor = " << outside_factor << "\n";
    os << "cs_area_max_dilatation = " << max_dilatation << "\n";
    if (suggested_zeta > 0.0) os << "suggested_zeta = " << suggested_zeta << "\n";
    line("cs_area_outside_bound", area_outside);
    os << "pass = " << (pass ? "true" : "false") << "\n";
    return os.str();
}

// sup of the one-step fiber displacement |Delta| + push, from the window
// supports and field bounds; certifies a travel-time floor between the
// zeta balls of distinct holes.
static double fiber_step_bound(const LayeredMap& map) {
    const FiberProfile& pr = map.skew.profile;
    double g_abs = std::max(-std::expm1(-pr.nu), std::expm1(pr.g_plus));
    double reach = pr.windows.left_end / pr.k; // mu_L support; mu_R is symmetric
    double circle_term = g_abs * reach + pr.u_plus * pr.k * reach * reach;
    double bound = circle_term + pr.u_plus;
    if (map.stage == Stage::F && map.push) bound += map.push->delta;
    return bound;
}

EscapeReport validate_escape(const LayeredMap& map, int samples, std::uint64_t seed, int max_iters) {
    if (map.stage != Stage::F)
        fail(Errc::bad_parameter, "validate_escape: map must be at stage f");
    if (max_iters < 1) fail(Errc::bad_parameter, "validate_escape: max_iters must be positive");
    const DAParams& d = *map.da;
    const int k = map.skew.profile.k;
    const double half = d.eps / 2.0;

    EscapeReport rep;
    rep.samples_per_hole = samples;
    rep.max_iters = max_iters;
    rep.fiber_step_bound = fiber_step_bound(map);
    rep.gap_floor =
        static_cast<int>(std::ceil((1.0 / k - 2.0 * d.zeta) / rep.fiber_step_bound));

    LayeredMap f0 = map;
    f0.stage = Stage::F0;
    {
        SamplePool pool = surgery_samples(map, std::max(1000, samples), seed, d.theta_outer * 1.2);
        double worst = 0.0;
        for (const Point3& p : pool.pts)
            worst = std::max(worst, std::fabs(u_component(map.skew.base, map.apply(p), f0.apply(p))));
        rep.leaf_preservation.margin = worst;
        rep.leaf_preservation.pass = worst <= 1e-12;
    }
    {
        ConeReport cone = cone_check(map, std::max(1000, samples), 0.2, seed);
        rep.cone_growth.pass = cone.growth_pass;
        rep.cone_growth.margin = cone.min_growth - 3.0;
    }

    bool all_escaped = true;
    int max_exit = 0, center_exit = 0;
    int residence_max = 0;
    long long gap_min = -1;
    std::ostringstream why;

    const int horizon = std::max(6000, 4 * max_iters);

    // follow one orbit, recording zeta-ball residence runs and gaps between
    // occupancies of distinct balls
    auto run_statistics = [&](Point3 p, bool count_residence) {
        std::vector<long long> last_in(static_cast<std::size_t>(k), -1);
        int run = 0, run_ball = -1;
        for (int step = 0; step < horizon; ++step) {
            int b = map.hole_containing(p, d.zeta);
            if (b >= 0) {
                if (run_ball == b) ++run;
                else { run = 1; run_ball = b; }
                if (count_residence) residence_max = std::max(residence_max, run);
                long long best = -1;
                for (int j = 0; j < k; ++j) {
                    if (j == b) continue;
                    best = std::max(best, last_in[static_cast<std::size_t>(j)]);
                }
                if (best >= 0 && last_in[static_cast<std::size_t>(b)] < step - 1) {
                    long long gap = step - best;
                    if (gap_min < 0 || gap < gap_min) gap_min = gap;
                }
                last_in[static_cast<std::size_t>(b)] = step;
            } else {
                run = 0;
                run_ball = -1;
            }
            p = map.apply(p);
        }
    };

    for (int h = 0; h < k; ++h) {
        Chart C = map.hole_chart(h);
        Point3 center = map.holes[static_cast<std::size_t>(h)];
        SplitMix64 rng = stream_rng(seed, 500 + static_cast<std::uint64_t>(h));

        // the hole center: measure-zero outflow axis, tracked separately;
        // with delta = 0 it would sit still forever
        {
            Point3 p = center;
            int steps = 0;
            while (steps < max_iters && torus_distance(p, center) <= half) {
                p = map.apply(p);
                ++steps;
            }
            if (torus_distance(p, center) <= half) {
                all_escaped = false;
                why << "hole " << h << ": center start never left B_{eps/2}; ";
            } else {
                center_exit = std::max(center_exit, steps);
            }
        }

        // escape gate over random starts in B_{eps/2}
        for (int n = 0; n < samples; ++n) {
            Point3 p = random_in_ball(rng, C, half);
            Point3 start = p;
            int steps = 0;
            while (steps < max_iters && torus_distance(p, center) <= half) {
                p = map.apply(p);
                ++steps;
            }
            if (torus_distance(p, center) <= half) {
                all_escaped = false;
                why << "hole " << h << ": start (" << start.x1 << "," << start.x2 << "," << start.t
                    << ") never left; ";
                break;
            }
            max_exit = std::max(max_exit, steps);
        }

        // N0: residence of random points of the zeta ball
        int res_samples = std::max(64, samples / 4);
        for (int n = 0; n < res_samples; ++n) {
            Point3 p = random_in_ball(rng, C, d.zeta);
            int steps = 0;
            while (steps < horizon && map.hole_containing(p, d.zeta) == h) {
                p = map.apply(p);
                ++steps;
            }
            residence_max = std::max(residence_max, steps);
        }

        // gap statistics: typical wanderers plus the outflow-axis orbit,
        // which transits to the ball above (residence excluded: the axis
        // carries zero Lebesgue measure and its crawl is area-contracting)
        run_statistics({center.x1, center.x2, wrap_unit(center.t + 0.9 * d.zeta)}, false);
    }

    {
        SplitMix64 rng = stream_rng(seed, 900);
        for (int n = 0; n < std::min(64, samples); ++n) run_statistics(random_point(rng), true);
    }

    rep.all_escaped = all_escaped;
    rep.max_exit_steps = max_exit;
    rep.center_exit_steps = center_exit;
    rep.zeta_residence_max = residence_max;
    rep.distinct_gap_observed = static_cast<int>(gap_min);
    rep.witness = why.str();
    rep.pass = all_escaped && rep.leaf_preservation.pass && rep.cone_growth.pass;
    return rep;
}

std::string EscapeReport::to_text() const {
    std::ostringstream os;
    os << "samples_per_hole = " << samples_per_hole << "\n";
    os << "max_iters = " << max_iters << "\n";
    os << "all_escaped = " << (all_escaped ? "true" : "false") << "\n";
    os << "max_exit_steps = " << max_exit_steps << "\n";
    os << "center_exit_steps = " << center_exit_steps << "\n";
    os << "zeta_residence_max = " << zeta_residence_max << "\n";
    os << "distinct_gap_observed = " << distinct_gap_observed << "\n";
    os << "fiber_step_bound = " << fiber_step_bound << "\n";
    os << "gap_floor = " << gap_floor << "\n";
    os << "leaf_preservation = " << (leaf_preservation.pass ? "pass" : "FAIL") << "\n";
    os << "cone_growth = " << (cone_growth.pass ? "pass" : "FAIL") << "\n";
    if (!witness.empty()) os << "witness = " << witness << "\n";
    os << "pass = " << (pass ? "true" : "false") << "\n";
    return os.str();
}

CertificateReport volume_certificate(const LayeredMap& map, int N0, int N1, int samples,
                                     std::uint64_t seed) {
    CertificateReport rep;
    rep.N0 = N0;
    rep.N1 = N1;

    SplitMix64 rng = stream_rng(seed, 61);
    double out_max = 0.0, all_max = 0.0;
    double zeta = map.da ? map.da->zeta : 0.0;
    auto consider = [&](Point3 p) {
        double area = cs_area_jacobian(map, p);
        all_max = std::max(all_max, area);
        if (!map.da || map.hole_containing(p, zeta) < 0) out_max = std::max(out_max, area);
    };
    for (int n = 0; n < samples; ++n) consider(random_point(rng));
    if (map.da) {
        const int k = map.skew.profile.k;
        for (int h = 0; h < k; ++h) {
            Chart C = map.hole_chart(h);
            SplitMix64 r2 = stream_rng(seed, 700 + static_cast<std::uint64_t>(h));
            int per = std::max(256, samples / k);
            for (int n = 0; n < per; ++n) consider(random_in_ball(r2, C, map.da->theta_outer));
        }
    }
    rep.max_dilatation = all_max;
    rep.outside_factor = out_max;
    rep.log_product = N0 * std::log(all_max) + N1 * std::log(out_max);
    rep.product = std::exp(rep.log_product);
    rep.pass = out_max <= 0.5 && N1 >= 0 && rep.log_product < 0.0;
    return rep;
}

std::string CertificateReport::to_text() const {
    std::ostringstream os;
    os << "N0 = " << N0 << "\n";
    os << "N1 = " << N1 << "\n";
    os << "max_dilatation = " << max_dilatation << "\n";
    os << "outside_factor = " << outside_factor << "\n";
    os << "product = " << product << "\n";
    os << "log_product = " << log_product << "\n";
    os << "pass = " << (pass ? "true" : "false") << "\n";
    return os.str();
}

} // namespace kanlab
