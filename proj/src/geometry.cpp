#include "kanlab/geometry.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

namespace kanlab {

namespace {

long long mod_ll(long long v, long long m) {
    long long r = v % m;
    return r < 0 ? r + m : r;
}

} // namespace

std::vector<Point2> base_fixed_points(const AnosovBase& A) {
    // (A - I) p ∈ Z^2 with p on the rational lattice of denominator
    // D = |det(A - I)| = |trace - 2|.  Exact integer arithmetic.
    long long D = std::llabs(static_cast<long long>(A.trace()) - 2);
    std::vector<Point2> pts;
    pts.reserve(static_cast<std::size_t>(D));
    long long a1 = A.a - 1, b = A.b, c = A.c, d1 = A.d - 1;
    for (long long m = 0; m < D; ++m) {
        for (long long n = 0; n < D; ++n) {
            if (mod_ll(a1 * m + b * n, D) == 0 && mod_ll(c * m + d1 * n, D) == 0)
                pts.push_back({static_cast<double>(m) / static_cast<double>(D),
                               static_cast<double>(n) / static_cast<double>(D)});
        }
    }
    std::sort(pts.begin(), pts.end(), [](Point2 p, Point2 q) {
        return p.x1 != q.x1 ? p.x1 < q.x1 : p.x2 < q.x2;
    });
    return pts;
}

AnosovBase make_anosov(int a, int b, int c, int d) {
    AnosovBase A;
    A.a = a;
    A.b = b;
    A.c = c;
    A.d = d;
    long long det = static_cast<long long>(a) * d - static_cast<long long>(b) * c;
    if (det != 1)
        fail(Errc::not_unimodular, "make_anosov: determinant is " + std::to_string(det) + ", need 1");

    long long tr = A.trace();
    double disc = static_cast<double>(tr) * static_cast<double>(tr) - 4.0;
    double lam = disc > 0.0 ? (static_cast<double>(tr) + std::sqrt(disc)) / 2.0 : 1.0;
    if (!(lam > 5.0))
        fail(Errc::eigenvalue_too_small,
             "make_anosov: dominant eigenvalue " + std::to_string(lam) + " <= 5");
    A.lambda_u = lam;
    A.lambda_s = (static_cast<double>(tr) - std::sqrt(disc)) / 2.0;

    if (std::llabs(tr - 2) < 5)
        fail(Errc::too_few_fixed_points,
             "make_anosov: |trace-2| = " + std::to_string(std::llabs(tr - 2)) + " < 5 fixed points");

    // Eigenvector from the second matrix row: c x + d y = λ y  =>  (λ-d, c).
    // c != 0 here: c == 0 with det 1 forces |trace| == 2, rejected above.
    auto unit_eigvec = [&](double l) {
        Vec2 v{l - static_cast<double>(d), static_cast<double>(c)};
        double n = v.norm();
        return v * (1.0 / n);
    };
    A.v_u = unit_eigvec(A.lambda_u);
    A.v_s = unit_eigvec(A.lambda_s);

    // Dual covectors; <w_u, v_s> vanishes exactly in floating point since it
    // is a difference of identical products.
    Vec2 pu = perp(A.v_s);
    A.w_u = pu * (1.0 / A.v_u.dot(pu));
    Vec2 ps = perp(A.v_u);
    A.w_s = ps * (1.0 / A.v_s.dot(ps));

    A.fixed_pts = base_fixed_points(A);
    return A;
}

} // namespace kanlab
