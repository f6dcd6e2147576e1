#include "doctest.h"

#include <cmath>
#include <set>

#include "kanlab/geometry.hpp"
#include "kanlab/rng.hpp"

using namespace kanlab;

namespace {

// Independent oracle: scan every rational with denominator |det(A-I)| and
// keep those with (A-I)p integral.  Written against the raw matrix entries,
// not the library enumeration.
std::set<std::pair<long long, long long>> oracle_fixed(int a, int b, int c, int d) {
    long long D = std::llabs(static_cast<long long>(a + d) - 2);
    std::set<std::pair<long long, long long>> out;
    for (long long m = 0; m < D; ++m)
        for (long long n = 0; n < D; ++n) {
            long long r1 = ((a - 1) * m + b * n) % D;
            long long r2 = (c * m + (d - 1) * n) % D;
            if (((r1 % D) + D) % D == 0 && ((r2 % D) + D) % D == 0) out.insert({m, n});
        }
    return out;
}

} // namespace

TEST_CASE("normalize reduces to [0,1) with the documented seam rule") {
    Point3 p = normalize({0.5, 0.25, 0.75});
    CHECK(p.x1 == 0.5);
    CHECK(p.x2 == 0.25);
    CHECK(p.t == 0.75);

    p = normalize({1.5, -0.25, 2.0});
    CHECK(p.x1 == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(p.x2 == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(p.t == 0.0);

    // the literal 1.0 - 1e-17 rounds to 1.0, which the seam rule sends to 0.0
    p = normalize({1.0 - 1e-17, 0.0, 0.0});
    CHECK(p.x1 == 0.0);
    // a representable value just below 1 stays put
    double just_below = std::nextafter(1.0, 0.0);
    CHECK(normalize({just_below, 0, 0}).x1 == just_below);
    // tiny negative values wrap to just below 1, not to 1
    CHECK(normalize({-1e-18, 0, 0}).x1 == 0.0);

    CHECK_THROWS_AS(normalize({std::nan(""), 0, 0}), Error);
    CHECK_THROWS_AS(normalize({0, 1.0 / 0.0, 0}), Error);
}

TEST_CASE("torus distance wraps and satisfies the triangle inequality") {
    CHECK(torus_distance({0.3, 0.4, 0.9}, {0.3, 0.4, 0.9}) == 0.0);
    CHECK(torus_distance({0, 0, 0}, {0.9, 0, 0}) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(torus_distance({0, 0, 0}, {0.5, 0.5, 0.5}) == doctest::Approx(std::sqrt(0.75)));

    SplitMix64 rng(7);
    for (int i = 0; i < 2000; ++i) {
        Point3 a{rng.next_unit(), rng.next_unit(), rng.next_unit()};
        Point3 b{rng.next_unit(), rng.next_unit(), rng.next_unit()};
        Point3 c{rng.next_unit(), rng.next_unit(), rng.next_unit()};
        double ab = torus_distance(a, b);
        CHECK(ab == doctest::Approx(torus_distance(b, a)).epsilon(1e-15));
        CHECK(ab <= torus_distance(a, c) + torus_distance(c, b) + 1e-12);
    }

    // exhaustive check over the 27 deck translates for a fixed pair
    Point3 a{0.1, 0.95, 0.5}, b{0.85, 0.05, 0.49};
    double best = 1e300;
    for (int i = -1; i <= 1; ++i)
        for (int j = -1; j <= 1; ++j)
            for (int l = -1; l <= 1; ++l) {
                double d1 = a.x1 - b.x1 + i, d2 = a.x2 - b.x2 + j, d3 = a.t - b.t + l;
                best = std::min(best, std::sqrt(d1 * d1 + d2 * d2 + d3 * d3));
            }
    CHECK(torus_distance(a, b) == doctest::Approx(best).epsilon(1e-15));
}

TEST_CASE("make_anosov validates and produces the eigenframe") {
    AnosovBase A = make_anosov(8, 7, 1, 1);
    CHECK(A.lambda_u == doctest::Approx((9.0 + std::sqrt(77.0)) / 2.0).epsilon(1e-15));
    CHECK(A.lambda_s == doctest::Approx((9.0 - std::sqrt(77.0)) / 2.0).epsilon(1e-15));
    CHECK(A.lambda_u > 5.0);
    CHECK(A.fixed_pts.size() == 7);

    // A v = lambda v within 1e-12
    auto resid = [&](Vec2 v, double lam) {
        Vec2 img{A.a * v.x + A.b * v.y, A.c * v.x + A.d * v.y};
        return std::hypot(img.x - lam * v.x, img.y - lam * v.y);
    };
    CHECK(resid(A.v_u, A.lambda_u) < 1e-12);
    CHECK(resid(A.v_s, A.lambda_s) < 1e-12);
    CHECK(A.v_u.norm() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(A.v_s.norm() == doctest::Approx(1.0).epsilon(1e-15));

    // dual frame pairings; the cross terms vanish exactly
    CHECK(A.w_u.dot(A.v_u) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(A.w_s.dot(A.v_s) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(A.w_u.dot(A.v_s) == 0.0);
    CHECK(A.w_s.dot(A.v_u) == 0.0);

    CHECK_THROWS_WITH_AS(static_cast<void>(make_anosov(2, 1, 1, 2)), doctest::Contains("determinant"),
                         Error);
    CHECK_THROWS_AS(static_cast<void>(make_anosov(2, 1, 1, 1)), Error); // eigenvalue ~2.618
    CHECK_THROWS_AS(static_cast<void>(make_anosov(1, 0, 0, 1)), Error); // identity
    try {
        static_cast<void>(make_anosov(2, 1, 1, 1));
    } catch (const Error& e) {
        CHECK(e.code() == Errc::eigenvalue_too_small);
    }
}

TEST_CASE("fixed points match the rational-lattice oracle") {
    struct M { int a, b, c, d; };
    const M mats[] = {{8, 7, 1, 1}, {6, 1, 5, 1}, {7, 5, 4, 3}, {9, 7, 5, 4}, {13, 8, 8, 5}};
    for (const M& m : mats) {
        AnosovBase A = make_anosov(m.a, m.b, m.c, m.d);
        auto oracle = oracle_fixed(m.a, m.b, m.c, m.d);
        long long D = std::llabs(static_cast<long long>(m.a + m.d) - 2);
        CHECK(A.fixed_pts.size() == oracle.size());
        CHECK(A.fixed_pts.size() == static_cast<std::size_t>(D));
        for (Point2 p : A.fixed_pts) {
            long long mm = std::llround(p.x1 * static_cast<double>(D));
            long long nn = std::llround(p.x2 * static_cast<double>(D));
            CHECK(oracle.count({mm, nn}) == 1);
        }
        // sorted lexicographically
        for (std::size_t i = 1; i < A.fixed_pts.size(); ++i) {
            bool le = A.fixed_pts[i - 1].x1 < A.fixed_pts[i].x1 ||
                      (A.fixed_pts[i - 1].x1 == A.fixed_pts[i].x1 &&
                       A.fixed_pts[i - 1].x2 < A.fixed_pts[i].x2);
            CHECK(le);
        }
    }

    // the default matrix has the explicit lattice {(0, j/7)}
    AnosovBase A = make_anosov(8, 7, 1, 1);
    for (int j = 0; j < 7; ++j) {
        CHECK(A.fixed_pts[static_cast<std::size_t>(j)].x1 == 0.0);
        CHECK(A.fixed_pts[static_cast<std::size_t>(j)].x2 ==
              doctest::Approx(j / 7.0).epsilon(1e-15));
    }
}

TEST_CASE("apply_base is the exact linear action mod 1") {
    AnosovBase A = make_anosov(8, 7, 1, 1);
    Point2 img = apply_base(A, {0.0, 0.0});
    CHECK(img.x1 == 0.0);
    CHECK(img.x2 == 0.0);

    img = apply_base(A, {0.0, 1.0 / 7.0});
    CHECK(img.x1 == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(img.x2 == doctest::Approx(1.0 / 7.0).epsilon(1e-15));

    img = apply_base(A, {0.5, 0.5});
    CHECK(img.x1 == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(img.x2 == doctest::Approx(0.0).epsilon(1e-15));

    // additivity mod 1 on random pairs
    SplitMix64 rng(11);
    for (int i = 0; i < 500; ++i) {
        Point2 x{rng.next_unit(), rng.next_unit()};
        Point2 y{rng.next_unit(), rng.next_unit()};
        Point2 xy{wrap_unit(x.x1 + y.x1), wrap_unit(x.x2 + y.x2)};
        Point2 lhs = apply_base(A, xy);
        Point2 rx = apply_base(A, x), ry = apply_base(A, y);
        CHECK(std::fabs(wrap_delta(lhs.x1 - rx.x1 - ry.x1)) < 1e-11);
        CHECK(std::fabs(wrap_delta(lhs.x2 - rx.x2 - ry.x2)) < 1e-11);
    }
}

TEST_CASE("chart round trip is the identity within the chart radius") {
    AnosovBase A = make_anosov(8, 7, 1, 1);
    Chart C = Chart::at(A, {0.3, 0.6, 0.25});

    ChartCoords zero = local_chart(C, C.anchor);
    CHECK(std::fabs(zero.u) < 1e-15);
    CHECK(std::fabs(zero.s) < 1e-15);
    CHECK(std::fabs(zero.w) < 1e-15);

    Point3 pu = normalize({C.anchor.x1 + 0.01 * A.v_u.x, C.anchor.x2 + 0.01 * A.v_u.y, C.anchor.t});
    ChartCoords cu = local_chart(C, pu);
    CHECK(cu.u == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(std::fabs(cu.s) < 1e-14);

    SplitMix64 rng(3);
    for (int i = 0; i < 2000; ++i) {
        ChartCoords c{rng.next_in(-0.1, 0.1), rng.next_in(-0.1, 0.1), rng.next_in(-0.1, 0.1)};
        Point3 p = chart_from(C, c);
        ChartCoords back = local_chart(C, p);
        CHECK(std::fabs(back.u - c.u) < 1e-12);
        CHECK(std::fabs(back.s - c.s) < 1e-12);
        CHECK(std::fabs(back.w - c.w) < 1e-12);
    }

    CHECK_THROWS_AS(local_chart(C, normalize({C.anchor.x1 + 0.4, C.anchor.x2, C.anchor.t})), Error);
}
