#include "kanlab/curve.hpp"

#include <algorithm>
#include <cmath>

namespace kanlab {

namespace {

double seg_length(Point3 a, Point3 b) { return torus_distance(a, b); }

} // namespace

UnstableCurve grow_unstable_curve(const LayeredMap& map, Point3 seed, double target_length,
                                  double max_seg, std::size_t max_vertices) {
    const AnosovBase& A = map.skew.base;
    const double h = 1e-5;

    auto base_point = [&](double c) {
        return normalize({seed.x1 + c * h * A.v_u.x, seed.x2 + c * h * A.v_u.y, seed.t});
    };

    std::vector<double> params{-1.0, 0.0, 1.0};
    std::vector<Point3> pts{base_point(-1.0), base_point(0.0), base_point(1.0)};
    int iters = 0;

    auto recompute = [&](double c) {
        Point3 p = base_point(c);
        for (int i = 0; i < iters; ++i) p = map.apply(p);
        return p;
    };

    auto total_length = [&]() {
        double L = 0.0;
        for (std::size_t i = 1; i < pts.size(); ++i) L += seg_length(pts[i - 1], pts[i]);
        return L;
    };

    const int max_iters = 60;
    while (iters < max_iters) {
        ++iters;
        for (Point3& p : pts) p = map.apply(p);

        // rebuild with recursive refinement; appends stay linear in the output
        std::vector<double> nparams;
        std::vector<Point3> npts;
        nparams.reserve(pts.size() * 2);
        npts.reserve(pts.size() * 2);
        nparams.push_back(params[0]);
        npts.push_back(pts[0]);
        auto refine = [&](auto&& self, double c0, const Point3& p0, double c1, const Point3& p1,
                          int depth) -> void {
            if (depth <= 0 || npts.size() >= max_vertices || seg_length(p0, p1) <= max_seg) {
                nparams.push_back(c1);
                npts.push_back(p1);
                return;
            }
            double cm = 0.5 * (c0 + c1);
            Point3 pm = recompute(cm);
            self(self, c0, p0, cm, pm, depth - 1);
            self(self, cm, pm, c1, p1, depth - 1);
        };
        for (std::size_t i = 1; i < pts.size(); ++i)
            refine(refine, params[i - 1], pts[i - 1], params[i], pts[i], 24);
        params = std::move(nparams);
        pts = std::move(npts);
        if (total_length() >= target_length || pts.size() >= max_vertices) break;
    }

    UnstableCurve out;
    out.points = std::move(pts);
    out.iterations = iters;
    out.arclen.resize(out.points.size());
    out.arclen[0] = 0.0;
    for (std::size_t i = 1; i < out.points.size(); ++i)
        out.arclen[i] = out.arclen[i - 1] + seg_length(out.points[i - 1], out.points[i]);
    return out;
}

double curve_first_slab_crossing(const UnstableCurve& curve, const AnosovBase& A, Point2 x,
                                 double eps) {
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        const Point3& pa = curve.points[i - 1];
        const Point3& pb = curve.points[i];
        Vec2 da{wrap_delta(pa.x1 - x.x1), wrap_delta(pa.x2 - x.x2)};
        Vec2 step{wrap_delta(pb.x1 - pa.x1), wrap_delta(pb.x2 - pa.x2)};
        double cu_a = A.w_u.dot(da);
        double cu_b = cu_a + A.w_u.dot(step);
        if ((cu_a <= 0.0 && cu_b >= 0.0) || (cu_a >= 0.0 && cu_b <= 0.0)) {
            double denom = cu_a - cu_b;
            double f = denom != 0.0 ? cu_a / denom : 0.0;
            double cs_a = A.w_s.dot(da);
            double cs_b = cs_a + A.w_s.dot(step);
            double cs_x = cs_a + f * (cs_b - cs_a);
            if (std::fabs(cs_x) <= eps)
                return curve.arclen[i - 1] + f * (curve.arclen[i] - curve.arclen[i - 1]);
        }
    }
    return -1.0;
}

double curve_first_band_climb(const UnstableCurve& curve, double t_circle, double eps, int k) {
    double hi = 1.0 / k - eps;
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
        double off = wrap_unit(curve.points[i].t - t_circle);
        if (off >= hi && off <= 1.5 / k) return curve.arclen[i];
    }
    return -1.0;
}

} // namespace kanlab
