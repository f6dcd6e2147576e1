#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "kanlab/errors.hpp"

namespace kanlab {

struct Vec2 {
    double x = 0.0, y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double c) const { return {c * x, c * y}; }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
};

inline Vec2 perp(Vec2 v) { return {-v.y, v.x}; }

struct Point2 {
    double x1 = 0.0, x2 = 0.0;
};

struct Point3 {
    double x1 = 0.0, x2 = 0.0, t = 0.0;

    Point2 base() const { return {x1, x2}; }
};

// Reduce to [0,1).  Floor subtraction; a result that rounds to 1.0 maps to 0.0.
inline double wrap_unit(double x) {
    double r = x - std::floor(x);
    return r == 1.0 ? 0.0 : r;
}

// Nearest-lift difference, in [-0.5, 0.5).
inline double wrap_delta(double d) {
    double r = d - std::floor(d);
    if (r == 1.0) r = 0.0;
    return r >= 0.5 ? r - 1.0 : r;
}

inline Point3 normalize(Point3 p) {
    if (!std::isfinite(p.x1) || !std::isfinite(p.x2) || !std::isfinite(p.t))
        fail(Errc::non_finite_coordinate, "normalize: non-finite coordinate");
    return {wrap_unit(p.x1), wrap_unit(p.x2), wrap_unit(p.t)};
}

inline double base_distance_sq(Point2 p, Point2 q) {
    double d1 = wrap_delta(p.x1 - q.x1);
    double d2 = wrap_delta(p.x2 - q.x2);
    return d1 * d1 + d2 * d2;
}

inline double base_distance(Point2 p, Point2 q) { return std::sqrt(base_distance_sq(p, q)); }

// Minimum Euclidean distance over deck translates of T^3.
inline double torus_distance(Point3 p, Point3 q) {
    double d1 = wrap_delta(p.x1 - q.x1);
    double d2 = wrap_delta(p.x2 - q.x2);
    double d3 = wrap_delta(p.t - q.t);
    return std::sqrt(d1 * d1 + d2 * d2 + d3 * d3);
}

// Linear Anosov base map with validated eigendata and the full fixed-point
// lattice.  v_u/v_s are unit eigenvectors, w_u/w_s the dual covectors
// (<w_u,v_u>=1, <w_u,v_s>=0 and vice versa); the eigenvectors are not
// orthogonal, so every decomposition goes through the duals.
struct AnosovBase {
    int a = 0, b = 0, c = 0, d = 0;
    double lambda_u = 0.0, lambda_s = 0.0;
    Vec2 v_u, v_s;
    Vec2 w_u, w_s;
    std::vector<Point2> fixed_pts;

    int trace() const { return a + d; }
};

AnosovBase make_anosov(int a, int b, int c, int d);

std::vector<Point2> base_fixed_points(const AnosovBase& A);

inline Point2 apply_base(const AnosovBase& A, Point2 x) {
    return {wrap_unit(A.a * x.x1 + A.b * x.x2), wrap_unit(A.c * x.x1 + A.d * x.x2)};
}

// Local (u,s,w) coordinates around an anchor, axes = (v_u, v_s, fiber).
struct Chart {
    Point3 anchor;
    Vec2 u_axis, s_axis; // copies of v_u, v_s
    Vec2 w_u, w_s;       // dual covectors

    static Chart at(const AnosovBase& A, Point3 anchor) {
        return Chart{anchor, A.v_u, A.v_s, A.w_u, A.w_s};
    }
};

struct ChartCoords {
    double u = 0.0, s = 0.0, w = 0.0;

    double r() const { return std::sqrt(u * u + s * s + w * w); }
};

constexpr double kChartRadius = 0.25;

inline ChartCoords local_chart_unchecked(const Chart& C, Point3 p) {
    Vec2 d{wrap_delta(p.x1 - C.anchor.x1), wrap_delta(p.x2 - C.anchor.x2)};
    return {C.w_u.dot(d), C.w_s.dot(d), wrap_delta(p.t - C.anchor.t)};
}

inline ChartCoords local_chart(const Chart& C, Point3 p) {
    if (torus_distance(p, C.anchor) > kChartRadius)
        fail(Errc::chart_out_of_range, "local_chart: point outside chart radius");
    return local_chart_unchecked(C, p);
}

inline Point3 chart_from(const Chart& C, ChartCoords c) {
    Vec2 d = C.u_axis * c.u + C.s_axis * c.s;
    return {wrap_unit(C.anchor.x1 + d.x), wrap_unit(C.anchor.x2 + d.y), wrap_unit(C.anchor.t + c.w)};
}

} // namespace kanlab
