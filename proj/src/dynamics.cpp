#include "kanlab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "kanlab/curve.hpp"
#include "kanlab/rng.hpp"

namespace kanlab {

Point3 iterate_orbit(const LayeredMap& map, Point3 p, long long n) {
    if (n < 0) fail(Errc::bad_parameter, "iterate_orbit: n must be >= 0");
    for (long long i = 0; i < n; ++i) p = map.apply(p);
    return p;
}

LyapunovEstimate lyapunov_spectrum(const LayeredMap& map, Point3 p, long long n, int reorth_period,
                                   std::uint64_t seed) {
    if (reorth_period < 1) fail(Errc::bad_parameter, "lyapunov_spectrum: reorth_period must be >= 1");
    if (n < 10LL * reorth_period)
        fail(Errc::bad_parameter, "lyapunov_spectrum: n must be >= 10 * reorth_period");

    // random orthonormal start frame
    std::array<Vec3, 3> Q;
    {
        SplitMix64 rng = stream_rng(seed, 7);
        for (auto& q : Q)
            q = {rng.next_in(-1, 1), rng.next_in(-1, 1), rng.next_in(-1, 1)};
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < i; ++j) {
                double c = vec3_dot(Q[i], Q[j]);
                for (int d = 0; d < 3; ++d) Q[i][d] -= c * Q[j][d];
            }
            double nn = vec3_norm(Q[i]);
            for (int d = 0; d < 3; ++d) Q[i][d] /= nn;
        }
    }

    std::array<double, 3> alpha{};
    const int n_batches = 16;
    std::vector<std::array<double, 3>> batch(static_cast<std::size_t>(n_batches));
    long long steps_done = 0;
    long long total = n - n % reorth_period;
    long long per_batch = std::max<long long>(1, total / n_batches);

    Mat3 J;
    auto advance_block = [&](std::array<double, 3>& lognorms) {
        for (int s = 0; s < reorth_period; ++s) {
            p = map.apply(p, &J);
            for (auto& q : Q) q = mat3_apply(J, q);
        }
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < i; ++j) {
                double c = vec3_dot(Q[i], Q[j]);
                for (int d = 0; d < 3; ++d) Q[i][d] -= c * Q[j][d];
            }
            double nn = vec3_norm(Q[i]);
            if (!std::isfinite(nn) || nn == 0.0)
                fail(Errc::bad_parameter, "lyapunov_spectrum: cocycle overflow; shrink reorth_period");
            lognorms[static_cast<std::size_t>(i)] = std::log(nn);
            for (int d = 0; d < 3; ++d) Q[i][d] /= nn;
        }
    };

    // warmup: let the frame align with the Oseledets flags before accumulating
    for (int w = 0; w < 10; ++w) {
        std::array<double, 3> drop{};
        advance_block(drop);
    }

    while (steps_done < total) {
        std::array<double, 3> lognorms{};
        advance_block(lognorms);
        steps_done += reorth_period;
        for (int i = 0; i < 3; ++i) {
            alpha[static_cast<std::size_t>(i)] += lognorms[static_cast<std::size_t>(i)];
            std::size_t bi = std::min<std::size_t>(static_cast<std::size_t>((steps_done - 1) / per_batch),
                                                   static_cast<std::size_t>(n_batches - 1));
            batch[bi][static_cast<std::size_t>(i)] += lognorms[static_cast<std::size_t>(i)];
        }
    }

    LyapunovEstimate est;
    est.iterations = steps_done;
    std::array<std::pair<double, double>, 3> vals;
    for (int i = 0; i < 3; ++i) {
        double rate = alpha[static_cast<std::size_t>(i)] / static_cast<double>(steps_done);
        // batch-means standard error of the rate
        double mean = 0.0;
        int used = 0;
        std::vector<double> rates;
        for (int b = 0; b < n_batches; ++b) {
            long long len = std::min(per_batch, steps_done - b * per_batch);
            if (len <= 0) break;
            rates.push_back(batch[static_cast<std::size_t>(b)][static_cast<std::size_t>(i)] /
                            static_cast<double>(len));
            mean += rates.back();
            ++used;
        }
        mean /= used;
        double var = 0.0;
        for (double r : rates) var += (r - mean) * (r - mean);
        var = used > 1 ? var / (used - 1) : 0.0;
        vals[static_cast<std::size_t>(i)] = {rate, std::sqrt(var / used)};
    }
    std::sort(vals.begin(), vals.end(), [](auto a, auto b) { return a.first > b.first; });
    for (int i = 0; i < 3; ++i) {
        est.exponents[static_cast<std::size_t>(i)] = vals[static_cast<std::size_t>(i)].first;
        est.stderrs[static_cast<std::size_t>(i)] = vals[static_cast<std::size_t>(i)].second;
    }
    return est;
}

namespace {

// 2x2 restriction of the Jacobian to span(v_s, e_t)
inline std::array<double, 4> cs_block(const AnosovBase& A, const Mat3& J) {
    Vec3 js = mat3_apply(J, Vec3{A.v_s.x, A.v_s.y, 0.0});
    Vec3 jt = mat3_apply(J, Vec3{0.0, 0.0, 1.0});
    return {A.w_s.x * js[0] + A.w_s.y * js[1], A.w_s.x * jt[0] + A.w_s.y * jt[1], js[2], jt[2]};
}

} // namespace

CsExponents cs_exponents(const LayeredMap& map, Point3 p, long long n) {
    if (n < 1) fail(Errc::bad_parameter, "cs_exponents: n must be >= 1");
    const AnosovBase& A = map.skew.base;
    double v1x = 1.0, v1y = 0.0; // in (v_s, e_t) coordinates
    double v2x = 0.0, v2y = 1.0;
    double a1 = 0.0, a2 = 0.0;
    Mat3 J;
    for (long long i = 0; i < n; ++i) {
        p = map.apply(p, &J);
        auto M = cs_block(A, J);
        double w1x = M[0] * v1x + M[1] * v1y, w1y = M[2] * v1x + M[3] * v1y;
        double w2x = M[0] * v2x + M[1] * v2y, w2y = M[2] * v2x + M[3] * v2y;
        double n1 = std::hypot(w1x, w1y);
        a1 += std::log(n1);
        v1x = w1x / n1;
        v1y = w1y / n1;
        double c = w2x * v1x + w2y * v1y;
        w2x -= c * v1x;
        w2y -= c * v1y;
        double n2 = std::hypot(w2x, w2y);
        a2 += std::log(n2);
        v2x = w2x / n2;
        v2y = w2y / n2;
    }
    CsExponents e;
    e.top = a1 / static_cast<double>(n);
    e.bottom = a2 / static_cast<double>(n);
    if (e.top < e.bottom) std::swap(e.top, e.bottom);
    return e;
}

DiskProbeResult unstable_disk_probe(const LayeredMap& map, Point3 seed_point, int n_points,
                                    long long n_iters, std::uint64_t seed) {
    if (n_points < 100) fail(Errc::bad_parameter, "unstable_disk_probe: n_points must be >= 100");
    if (n_iters < 1) fail(Errc::bad_parameter, "unstable_disk_probe: n_iters must be >= 1");

    UnstableCurve curve = grow_unstable_curve(map, seed_point, 1.0, 5e-4, 100000);
    if (curve.length() < 1.0)
        fail(Errc::bad_parameter, "unstable_disk_probe: curve failed to reach length 1");

    DiskProbeResult res;
    res.points = n_points;
    res.curve_length = curve.length();
    res.worst_exponent = -1e300;

    SplitMix64 rng = stream_rng(seed, 13);
    int negative = 0;
    for (int i = 0; i < n_points; ++i) {
        double target = curve.length() * (i + rng.next_unit()) / n_points;
        auto it = std::lower_bound(curve.arclen.begin(), curve.arclen.end(), target);
        std::size_t idx = std::min<std::size_t>(
            static_cast<std::size_t>(it - curve.arclen.begin()), curve.points.size() - 1);
        double top = cs_exponents(map, curve.points[idx], n_iters).top;
        if (top < 0.0) ++negative;
        res.worst_exponent = std::max(res.worst_exponent, top);
    }
    res.fraction_negative = static_cast<double>(negative) / n_points;
    return res;
}

BasinLabel classify_basin(const LayeredMap& map, Point3 p, const ClassifyParams& params) {
    const int k = map.skew.profile.k;
    const double t_tol = params.t_tol > 0.0 ? params.t_tol : 1.0 / (4.0 * k);
    if (!(t_tol < 1.0 / (2.0 * k)))
        fail(Errc::bad_parameter, "classify_basin: t_tol must be below 1/(2k)");
    if (!(params.majority > 0.5 && params.majority <= 1.0))
        fail(Errc::bad_parameter, "classify_basin: majority must lie in (0.5, 1]");
    if (params.window < 1 || params.n_transient < 0 || params.n_max < params.n_transient)
        fail(Errc::bad_parameter, "classify_basin: bad iteration budget");

    const double eps = map.da ? map.da->eps : 0.0;
    const double eps_sq = eps * eps;

    auto circle_of = [&](const Point3& q) -> int {
        int j = static_cast<int>(std::lround(static_cast<double>(k) * q.t)) % k;
        if (j < 0) j += k;
        double dt = wrap_delta(q.t - map.skew.profile.circle_t(j));
        if (std::fabs(dt) > t_tol) return -1;
        if (map.da) {
            const Point3& h = map.holes[static_cast<std::size_t>(j)];
            if (std::fabs(dt) <= eps &&
                base_distance_sq(q.base(), h.base()) + dt * dt <= eps_sq)
                return -1; // inside a hole ball: not settled on the attractor
        }
        return j;
    };

    for (int i = 0; i < params.n_transient; ++i) p = map.apply(p);

    const int window = params.window;
    const int need = static_cast<int>(std::ceil(params.majority * window));
    std::vector<signed char> ring(static_cast<std::size_t>(window), -1);
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    int pos = 0, filled = 0;

    for (int step = params.n_transient; step < params.n_max; ++step) {
        p = map.apply(p);
        int c = circle_of(p);
        signed char old = ring[static_cast<std::size_t>(pos)];
        if (old >= 0) --counts[static_cast<std::size_t>(old)];
        ring[static_cast<std::size_t>(pos)] = static_cast<signed char>(c);
        if (c >= 0) ++counts[static_cast<std::size_t>(c)];
        pos = (pos + 1) % window;
        if (filled < window) ++filled;
        if (filled == window && c >= 0 && counts[static_cast<std::size_t>(c)] >= need)
            return {c + 1, step + 1};
    }
    return {0, params.n_max};
}

} // namespace kanlab
