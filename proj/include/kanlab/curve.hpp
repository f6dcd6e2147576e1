#pragma once

#include <vector>

#include "kanlab/layered_map.hpp"

namespace kanlab {

// Polyline approximation of a local unstable curve, grown by forward
// iteration of a short segment through the seed (iterated curves align with
// the expanding direction).  Points are normalized; arclength is accumulated
// from wrapped segment steps, so segments must stay much shorter than 1/2.
struct UnstableCurve {
    std::vector<Point3> points;
    std::vector<double> arclen; // cumulative, arclen[0] = 0
    int iterations = 0;

    double length() const { return arclen.empty() ? 0.0 : arclen.back(); }
};

UnstableCurve grow_unstable_curve(const LayeredMap& map, Point3 seed, double target_length,
                                  double max_seg, std::size_t max_vertices);

// Arclength at the first crossing of the slab W^s_A(x, 2*eps) x S^1,
// or -1 if the curve never crosses it.
double curve_first_slab_crossing(const UnstableCurve& curve, const AnosovBase& A, Point2 x,
                                 double eps);

// Arclength at the first vertex risen to fiber offset >= (1/k - eps) above
// the circle t_circle, or -1.
double curve_first_band_climb(const UnstableCurve& curve, double t_circle, double eps, int k);

} // namespace kanlab
