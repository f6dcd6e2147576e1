#include "doctest.h"

#include <cmath>

#include "kanlab/layered_map.hpp"
#include "kanlab/rng.hpp"

using namespace kanlab;

namespace {

SkewMap default_skew() {
    AnosovBase A = make_anosov(8, 7, 1, 1);
    FiberProfile prof = make_profile(A, 6, {0, 1, 2, 3, 4}, 0.1, 0.05, 0.002, 0.04);
    return make_skew_map(A, prof);
}

LayeredMap stage_map(Stage stage) {
    SkewMap skew = default_skew();
    DAParams da = default_da_params(0.02);
    PushParams push = default_push_params(0.02);
    if (stage == Stage::F0) return make_layered(skew, std::nullopt, std::nullopt, stage);
    if (stage == Stage::F1) return make_layered(skew, da, std::nullopt, stage);
    return make_layered(skew, da, push, stage);
}

// independent 1-D oracle for the in-torus axis dynamics through a hole
struct AxisOracle {
    double lam_s, delta_da, s0, inner, outer, lambda;

    double theta(double r) const {
        if (r <= inner) return 1.0;
        if (r >= outer) return 0.0;
        double t = (outer - r) / (outer - inner);
        double h0 = std::exp(-lambda / t), h1 = std::exp(-lambda / (1.0 - t));
        return h0 / (h0 + h1);
    }
    double operator()(double s) const {
        double y = lam_s * s;
        return y + delta_da * theta(std::fabs(y)) * s0 * std::tanh(y / s0);
    }
    double find_root(double lo, double hi) const {
        double glo = (*this)(lo) - lo;
        for (int i = 0; i < 100; ++i) {
            double mid = 0.5 * (lo + hi);
            double gm = (*this)(mid) - mid;
            if ((glo <= 0) == (gm <= 0)) { lo = mid; glo = gm; } else hi = mid;
        }
        return 0.5 * (lo + hi);
    }
};

} // namespace

TEST_CASE("surgery parameters are validated") {
    SkewMap skew = default_skew();
    DAParams da = default_da_params(0.02);
    PushParams push = default_push_params(0.02);
    CHECK_NOTHROW(static_cast<void>(make_layered(skew, da, push, Stage::F)));

    auto expect = [&](DAParams d, PushParams p, Stage st, Errc code) {
        try {
            static_cast<void>(make_layered(skew, d, p, st));
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.code() == code);
        }
    };

    DAParams weak = da;
    weak.delta_da = 5.0; // (1+5) lambda_s ~ 0.675 < 1
    expect(weak, push, Stage::F1, Errc::not_a_source);

    DAParams fat = da;
    fat.s0 = 0.01; // kills the diffeo margin
    expect(fat, push, Stage::F1, Errc::diffeo_margin_violated);

    DAParams wide = da;
    wide.eps = 0.11; // reaches the bumps of the other special points
    wide.theta_inner = 0.011;
    wide.theta_outer = 0.11;
    wide.s0 = 0.0005;
    wide.zeta = 0.08;
    expect(wide, push, Stage::F1, Errc::bad_parameter); // eps >= 1/(2k) triggers first

    PushParams strong = push;
    strong.delta = 0.004;
    strong.inner = 0.0098;
    strong.outer = 0.0099; // |delta * eta'| >= 1
    expect(da, strong, Stage::F, Errc::diffeo_margin_violated);

    CHECK_THROWS_AS(static_cast<void>(make_layered(skew, std::nullopt, std::nullopt, Stage::F1)),
                    Error);
}

TEST_CASE("the layered map equals the plain skew product away from the holes") {
    LayeredMap f0 = stage_map(Stage::F0);
    LayeredMap f1 = stage_map(Stage::F1);
    LayeredMap f = stage_map(Stage::F);
    SplitMix64 rng(23);
    int tested = 0;
    while (tested < 2000) {
        Point3 p{rng.next_unit(), rng.next_unit(), rng.next_unit()};
        Point3 q = f0.apply(p);
        if (f0.hole_containing(q, 0.025) >= 0) continue; // image lands near a hole
        ++tested;
        Point3 q1 = f1.apply(p), qf = f.apply(p);
        CHECK(torus_distance(q, q1) == 0.0);
        CHECK(torus_distance(q, qf) == 0.0);
    }
}

TEST_CASE("hole centers are fixed at stage f1 and pushed up at stage f") {
    LayeredMap f1 = stage_map(Stage::F1);
    LayeredMap f = stage_map(Stage::F);
    for (int h = 0; h < 6; ++h) {
        Point3 c = f1.holes[static_cast<std::size_t>(h)];
        CHECK(torus_distance(f1.apply(c), c) <= 1e-12);
        Point3 moved = f.apply(c);
        CHECK(wrap_delta(moved.t - c.t) == doctest::Approx(0.0025).epsilon(1e-9));
    }
}

TEST_CASE("analytic Jacobians match finite differences at every stage") {
    // h balances truncation against roundoff: the saturation profile has
    // third derivatives of order delta_da / s0^2 ~ 3e7
    const double h = 1e-7;
    for (Stage st : {Stage::F0, Stage::F1, Stage::F}) {
        LayeredMap map = stage_map(st);
        SplitMix64 rng(31 + static_cast<int>(st));
        int n = 0;
        while (n < 100) {
            Point3 p{rng.next_unit(), rng.next_unit(), rng.next_unit()};
            // half the points stressed near holes where the surgery acts
            if (n % 2 == 1) {
                Chart C = map.hole_chart(n % 6);
                p = chart_from(C, {rng.next_in(-0.002, 0.002), rng.next_in(-0.015, 0.015),
                                   rng.next_in(-0.015, 0.015)});
            }
            ++n;
            Mat3 J;
            map.apply(p, &J);
            for (int col = 0; col < 3; ++col) {
                Point3 hi = p, lo = p;
                (col == 0 ? hi.x1 : col == 1 ? hi.x2 : hi.t) += h;
                (col == 0 ? lo.x1 : col == 1 ? lo.x2 : lo.t) -= h;
                Point3 qh = map.apply(normalize(hi)), ql = map.apply(normalize(lo));
                double fd[3] = {wrap_delta(qh.x1 - ql.x1) / (2 * h),
                                wrap_delta(qh.x2 - ql.x2) / (2 * h),
                                wrap_delta(qh.t - ql.t) / (2 * h)};
                for (int row = 0; row < 3; ++row) {
                    double scale = std::max(1.0, std::fabs(J[row][col]));
                    CHECK(std::fabs(fd[row] - J[row][col]) / scale < 1e-6);
                }
            }
        }
    }
}

TEST_CASE("the plane span(v_s, e_t) is exactly invariant at every stage") {
    for (Stage st : {Stage::F0, Stage::F1, Stage::F}) {
        LayeredMap map = stage_map(st);
        const AnosovBase& A = map.skew.base;
        SplitMix64 rng(41 + static_cast<int>(st));
        double worst = 0.0;
        for (int n = 0; n < 10000; ++n) {
            Point3 p{rng.next_unit(), rng.next_unit(), rng.next_unit()};
            if (n % 3 == 2) {
                Chart C = map.hole_chart(n % 6);
                p = chart_from(C, {rng.next_in(-0.01, 0.01), rng.next_in(-0.015, 0.015),
                                   rng.next_in(-0.015, 0.015)});
            }
            Mat3 J;
            map.apply(p, &J);
            double phi = rng.next_in(0.0, 2.0 * M_PI);
            Vec3 v{std::cos(phi) * A.v_s.x, std::cos(phi) * A.v_s.y, std::sin(phi)};
            Vec3 img = mat3_apply(J, v);
            worst = std::max(worst, std::fabs(A.w_u.dot({img[0], img[1]})));
        }
        CHECK(worst <= 1e-12);
    }
}

TEST_CASE("the u-coordinate expands by exactly lambda_u at every stage") {
    for (Stage st : {Stage::F0, Stage::F1, Stage::F}) {
        LayeredMap map = stage_map(st);
        const AnosovBase& A = map.skew.base;
        SplitMix64 rng(51);
        for (int n = 0; n < 300; ++n) {
            Point3 p{rng.next_unit(), rng.next_unit(), rng.next_unit()};
            Mat3 J;
            map.apply(p, &J);
            Vec3 vu{A.v_u.x, A.v_u.y, 0.0};
            Vec3 img = mat3_apply(J, vu);
            CHECK(A.w_u.dot({img[0], img[1]}) == doctest::Approx(A.lambda_u).epsilon(1e-12));
        }
    }
}

TEST_CASE("axis scan finds the source and the two saddles outside the half ball") {
    LayeredMap f1 = stage_map(Stage::F1);
    const DAParams& d = *f1.da;
    double expect_source = (1.0 + d.delta_da) * f1.skew.base.lambda_s;

    AxisOracle oracle{f1.skew.base.lambda_s, d.delta_da, d.s0, d.theta_inner, d.theta_outer,
                      d.cutoff_lambda};
    double s_star = oracle.find_root(1e-4, d.eps);

    for (int h = 0; h < 6; ++h) {
        auto fps = scan_saddle_structure(f1, h);
        REQUIRE(fps.size() == 3);
        CHECK(std::fabs(fps[1].s) < 1e-9);
        CHECK(fps[1].derivative == doctest::Approx(expect_source).epsilon(1e-10));
        CHECK_FALSE(fps[1].attracting);
        for (int e : {0, 2}) {
            CHECK(std::fabs(fps[static_cast<std::size_t>(e)].s) > d.eps / 2.0);
            CHECK(std::fabs(fps[static_cast<std::size_t>(e)].s) ==
                  doctest::Approx(s_star).epsilon(1e-6));
            CHECK(fps[static_cast<std::size_t>(e)].attracting);
        }
    }
}

TEST_CASE("a push threshold barely above the source bound yields in-ball saddles") {
    SkewMap skew = default_skew();
    DAParams da = default_da_params(0.02);
    da.delta_da = 8.2; // just above 1/lambda_s - 1 ~ 7.887
    LayeredMap f1 = make_layered(skew, da, std::nullopt, Stage::F1);
    auto fps = scan_saddle_structure(f1, 0);
    REQUIRE(fps.size() == 3);
    // saddles exist but sit inside B_{eps/2}: the M4 check must flag this
    CHECK(std::fabs(fps[0].s) < da.eps / 2.0);
    SurgeryReport rep = validate_surgery(f1, 2000, 77);
    CHECK_FALSE(rep.hole_saddles.pass);
}

TEST_CASE("a sub-threshold push keeps the origin as the only axis fixed point") {
    SkewMap skew = default_skew();
    DAParams da = default_da_params(0.02);
    da.delta_da = 7.0; // below 1/lambda_s - 1: no source, single fixed point
    CHECK_THROWS_AS(static_cast<void>(make_layered(skew, da, std::nullopt, Stage::F1)), Error);
}

TEST_CASE("cs-area at the hole equals the source rate") {
    LayeredMap f1 = stage_map(Stage::F1);
    Point3 hole = f1.holes[2];
    double area = cs_area_jacobian(f1, hole);
    CHECK(area == doctest::Approx((1.0 + f1.da->delta_da) * f1.skew.base.lambda_s).epsilon(1e-9));

    LayeredMap f0 = stage_map(Stage::F0);
    SplitMix64 rng(61);
    for (int n = 0; n < 2000; ++n) {
        Point3 p{rng.next_unit(), rng.next_unit(), rng.next_unit()};
        double a0 = cs_area_jacobian(f0, p);
        CHECK(a0 >= f0.skew.base.lambda_s * 0.5);
        CHECK(a0 <= f0.skew.base.lambda_s * 1.5);
    }
}

TEST_CASE("in-plane shear leaves the restricted cs-area unchanged") {
    AnosovBase A = make_anosov(8, 7, 1, 1);
    auto area = [&](const Mat3& M) {
        Vec3 js = mat3_apply(M, Vec3{A.v_s.x, A.v_s.y, 0.0});
        Vec3 jt = mat3_apply(M, Vec3{0, 0, 1});
        double a = A.w_s.dot({js[0], js[1]});
        double b = A.w_s.dot({jt[0], jt[1]});
        return std::fabs(a * jt[2] - b * js[2]);
    };
    Mat3 J{{{A.lambda_u, 0, 0.2}, {0.1, A.lambda_s, 0}, {0.4, 0.3, 0.9}}};
    double base = area(J);
    SplitMix64 rng(71);
    for (int n = 0; n < 100; ++n) {
        double c = rng.next_in(-5.0, 5.0);
        // shear within the plane: e_t -> e_t + c v_s before applying J
        Mat3 S = mat3_identity();
        S[0][2] = c * A.v_s.x;
        S[1][2] = c * A.v_s.y;
        Mat3 JS = mat3_mul(J, S);
        CHECK(area(JS) == doctest::Approx(base).epsilon(1e-10));
    }
}
