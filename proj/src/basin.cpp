#include "kanlab/basin.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

#include "kanlab/rng.hpp"

namespace kanlab {

const char* slice_kind_name(SliceKind k) {
    switch (k) {
        case SliceKind::FixBase1: return "fix_base1";
        case SliceKind::FixBase2: return "fix_base2";
        case SliceKind::FixFiber: return "fix_fiber";
        case SliceKind::BaseLine: return "base_line";
    }
    return "?";
}

Point3 slice_point(const SliceSpec& spec, const AnosovBase& A, double a1, double a2) {
    switch (spec.kind) {
        case SliceKind::FixBase1: return normalize({spec.fixed_value, a1, a2});
        case SliceKind::FixBase2: return normalize({a1, spec.fixed_value, a2});
        case SliceKind::FixFiber: return normalize({a1, a2, spec.fixed_value});
        case SliceKind::BaseLine:
            return normalize({spec.fixed_value + a1 * A.v_u.x, a1 * A.v_u.y, a2});
    }
    return {};
}

namespace {

void check_spec(const SliceSpec& spec) {
    if (spec.width < 16 || spec.height < 16)
        fail(Errc::bad_parameter, "sweep_raster: resolution must be at least 16x16");
    auto ok = [](Range r) { return r.lo >= 0.0 && r.hi <= 1.0 && r.lo < r.hi; };
    if (!ok(spec.range1) || !ok(spec.range2))
        fail(Errc::bad_parameter, "sweep_raster: ranges must be within [0,1]");
}

// deterministic parallel for: output indexed by cell, chunked atomic counter
template <typename Fn>
void parallel_cells(std::size_t n, int workers, Fn&& fn) {
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    const std::size_t chunk = 64;
    auto work = [&]() {
        for (;;) {
            std::size_t begin = next.fetch_add(chunk);
            if (begin >= n) return;
            std::size_t end = std::min(n, begin + chunk);
            for (std::size_t i = begin; i < end; ++i) fn(i);
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
}

} // namespace

BasinRaster sweep_raster(const LayeredMap& map, const SliceSpec& spec, const ClassifyParams& params,
                         int workers, std::uint64_t seed) {
    check_spec(spec);
    BasinRaster raster;
    raster.spec = spec;
    raster.k = map.skew.profile.k;
    raster.params = params;
    raster.seed = seed;
    raster.map_fingerprint = 0;
    std::size_t n = static_cast<std::size_t>(spec.width) * static_cast<std::size_t>(spec.height);
    raster.labels.assign(n, 0);
    raster.settle.assign(n, 0);

    const double w1 = (spec.range1.hi - spec.range1.lo) / spec.width;
    const double w2 = (spec.range2.hi - spec.range2.lo) / spec.height;

    parallel_cells(n, workers, [&](std::size_t idx) {
        int ix = static_cast<int>(idx % static_cast<std::size_t>(spec.width));
        int iy = static_cast<int>(idx / static_cast<std::size_t>(spec.width));
        double o1 = 0.5, o2 = 0.5;
        if (spec.jitter > 0.0) {
            SplitMix64 rng = stream_rng(seed, idx);
            o1 += spec.jitter * (rng.next_unit() - 0.5);
            o2 += spec.jitter * (rng.next_unit() - 0.5);
        }
        Point3 p = slice_point(spec, map.skew.base, spec.range1.lo + (ix + o1) * w1,
                               spec.range2.lo + (iy + o2) * w2);
        BasinLabel lab = classify_basin(map, p, params);
        raster.labels[idx] = static_cast<std::int16_t>(lab.label);
        raster.settle[idx] = lab.settle_time;
    });
    return raster;
}

Box3Result sweep_box3(const LayeredMap& map, std::array<int, 3> dims, const ClassifyParams& params,
                      int workers, std::uint64_t seed) {
    for (int d : dims)
        if (d < 1) fail(Errc::bad_parameter, "sweep_box3: grid dimensions must be positive");
    Box3Result res;
    res.dims = dims;
    res.k = map.skew.profile.k;
    res.params = params;
    res.seed = seed;
    std::size_t n = static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) *
                    static_cast<std::size_t>(dims[2]);
    res.labels.assign(n, 0);
    res.settle.assign(n, 0);

    parallel_cells(n, workers, [&](std::size_t idx) {
        std::size_t ix = idx % static_cast<std::size_t>(dims[0]);
        std::size_t rest = idx / static_cast<std::size_t>(dims[0]);
        std::size_t iy = rest % static_cast<std::size_t>(dims[1]);
        std::size_t iz = rest / static_cast<std::size_t>(dims[1]);
        Point3 p{(static_cast<double>(ix) + 0.5) / dims[0], (static_cast<double>(iy) + 0.5) / dims[1],
                 (static_cast<double>(iz) + 0.5) / dims[2]};
        BasinLabel lab = classify_basin(map, p, params);
        res.labels[idx] = static_cast<std::int16_t>(lab.label);
        res.settle[idx] = lab.settle_time;
    });
    return res;
}

MeasureReport measure_report(const std::vector<std::int16_t>& labels,
                             const std::vector<std::int32_t>& settle, int k) {
    if (labels.empty()) fail(Errc::bad_parameter, "measure_report: empty grid");
    MeasureReport rep;
    rep.k = k;
    rep.cells = labels.size();
    std::vector<std::int64_t> counts(static_cast<std::size_t>(k) + 1, 0);
    std::vector<double> st(static_cast<std::size_t>(k) + 1, 0.0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        int l = labels[i];
        counts[static_cast<std::size_t>(l)]++;
        st[static_cast<std::size_t>(l)] += settle.empty() ? 0.0 : settle[i];
    }
    rep.fractions.resize(counts.size());
    rep.mean_settle.resize(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        rep.fractions[i] = static_cast<double>(counts[i]) / static_cast<double>(labels.size());
        rep.mean_settle[i] = counts[i] > 0 ? st[i] / static_cast<double>(counts[i]) : 0.0;
    }
    return rep;
}

std::string MeasureReport::to_text() const {
    std::ostringstream os;
    os << "cells = " << cells << "\n";
    os << "unresolved_fraction = " << fractions[0] << "\n";
    for (int i = 1; i <= k; ++i) {
        os << "label_" << i << "_fraction = " << fractions[static_cast<std::size_t>(i)] << "\n";
        os << "label_" << i << "_mean_settle = " << mean_settle[static_cast<std::size_t>(i)] << "\n";
    }
    return os.str();
}

IntermingleReport intermingle_report(const BasinRaster& raster, const std::vector<int>& scales,
                                     double min_fraction) {
    IntermingleReport rep;
    rep.min_fraction = min_fraction;
    rep.k = raster.k;
    rep.scales = scales;
    for (int scale : scales) {
        if (scale < 1 || raster.spec.width % scale != 0 || raster.spec.height % scale != 0)
            fail(Errc::bad_parameter,
                 "intermingle_report: scale " + std::to_string(scale) + " must divide the resolution");
        ScaleReport sr;
        sr.boxes_x = scale;
        sr.boxes_y = scale;
        sr.box_w = raster.spec.width / scale;
        sr.box_h = raster.spec.height / scale;
        for (int by = 0; by < scale; ++by) {
            for (int bx = 0; bx < scale; ++bx) {
                BoxStat st;
                st.bx = bx;
                st.by = by;
                st.counts.assign(static_cast<std::size_t>(raster.k) + 1, 0);
                for (int y = by * sr.box_h; y < (by + 1) * sr.box_h; ++y)
                    for (int x = bx * sr.box_w; x < (bx + 1) * sr.box_w; ++x)
                        st.counts[static_cast<std::size_t>(raster.label_at(x, y))]++;
                double cells = static_cast<double>(sr.box_w) * sr.box_h;
                for (int l = 0; l <= raster.k; ++l)
                    if (static_cast<double>(st.counts[static_cast<std::size_t>(l)]) / cells >=
                        min_fraction)
                        st.present.push_back(l);
                sr.boxes.push_back(std::move(st));
            }
        }
        rep.per_scale.push_back(std::move(sr));
    }
    return rep;
}

std::string IntermingleReport::to_csv() const {
    std::ostringstream os;
    os << "scale,box_x,box_y,label,count,fraction,present\n";
    for (std::size_t s = 0; s < per_scale.size(); ++s) {
        const ScaleReport& sr = per_scale[s];
        double cells = static_cast<double>(sr.box_w) * sr.box_h;
        for (const BoxStat& b : sr.boxes) {
            for (int l = 0; l <= k; ++l) {
                std::int64_t c = b.counts[static_cast<std::size_t>(l)];
                if (c == 0) continue;
                bool present = false;
                for (int pl : b.present) present = present || pl == l;
                os << scales[s] << "," << b.bx << "," << b.by << "," << l << "," << c << ","
                   << (static_cast<double>(c) / cells) << "," << (present ? 1 : 0) << "\n";
            }
        }
    }
    return os.str();
}

BandCheck band_coverage_check(const BasinRaster& raster, const IntermingleReport& report,
                              int scale_index) {
    BandCheck out;
    if (raster.spec.kind == SliceKind::FixFiber)
        fail(Errc::bad_parameter, "band_coverage_check: needs a slice with the fiber on axis 2");
    const ScaleReport& sr = report.per_scale[static_cast<std::size_t>(scale_index)];
    const int k = raster.k;
    const double lo = raster.spec.range2.lo;
    const double span = raster.spec.range2.hi - lo;
    out.pass = true;
    for (const BoxStat& b : sr.boxes) {
        double t0 = lo + span * (static_cast<double>(b.by) * sr.box_h) / raster.spec.height;
        double t1 = lo + span * (static_cast<double>(b.by + 1) * sr.box_h) / raster.spec.height;
        // band containing the box, if the box straddles no circle
        int band = static_cast<int>(std::floor(t0 * k));
        if (band >= k) band = k - 1;
        double circ_lo = static_cast<double>(band) / k;
        double circ_hi = static_cast<double>(band + 1) / k;
        if (!(t0 > circ_lo && t1 < circ_hi)) continue; // touches a circle; skip
        ++out.boxes_checked;
        int want_a = band + 1;            // labels are circle index + 1
        int want_b = (band + 1) % k + 1;
        bool have_a = false, have_b = false;
        for (int l : b.present) {
            have_a = have_a || l == want_a;
            have_b = have_b || l == want_b;
        }
        if (!(have_a && have_b)) {
            out.pass = false;
            if (out.first_failure.empty()) {
                std::ostringstream os;
                os << "box (" << b.bx << "," << b.by << ") in band " << band << " misses label "
                   << (have_a ? want_b : want_a);
                out.first_failure = os.str();
            }
        }
    }
    return out;
}

std::vector<Rgb> default_palette(int k) {
    std::vector<Rgb> pal;
    pal.push_back({0, 0, 0}); // unresolved
    for (int i = 0; i < k; ++i) {
        // evenly spaced hues, full saturation
        double h = 6.0 * i / k;
        int sector = static_cast<int>(h) % 6;
        double f = h - std::floor(h);
        auto byte = [](double v) { return static_cast<std::uint8_t>(std::lround(255.0 * v)); };
        double q = 1.0 - f;
        switch (sector) {
            case 0: pal.push_back({255, byte(f), 0}); break;
            case 1: pal.push_back({byte(q), 255, 0}); break;
            case 2: pal.push_back({0, 255, byte(f)}); break;
            case 3: pal.push_back({0, byte(q), 255}); break;
            case 4: pal.push_back({byte(f), 0, 255}); break;
            default: pal.push_back({255, 0, byte(q)}); break;
        }
    }
    return pal;
}

std::string render_ppm(const BasinRaster& raster, const std::vector<Rgb>& palette) {
    if (static_cast<int>(palette.size()) < raster.k + 1)
        fail(Errc::bad_parameter, "render_ppm: palette must cover unresolved plus labels 1..k");
    std::ostringstream os;
    os << "P6\n" << raster.spec.width << " " << raster.spec.height << "\n255\n";
    std::string body;
    body.reserve(static_cast<std::size_t>(raster.spec.width) *
                 static_cast<std::size_t>(raster.spec.height) * 3);
    for (int iy = raster.spec.height - 1; iy >= 0; --iy) {
        for (int ix = 0; ix < raster.spec.width; ++ix) {
            const Rgb& c = palette[static_cast<std::size_t>(raster.label_at(ix, iy))];
            body.push_back(static_cast<char>(c[0]));
            body.push_back(static_cast<char>(c[1]));
            body.push_back(static_cast<char>(c[2]));
        }
    }
    return os.str() + body;
}

std::string raster_to_csv(const BasinRaster& raster) {
    std::ostringstream os;
    os << "# kind=" << slice_kind_name(raster.spec.kind) << " fixed=" << raster.spec.fixed_value
       << " r1=" << raster.spec.range1.lo << ":" << raster.spec.range1.hi
       << " r2=" << raster.spec.range2.lo << ":" << raster.spec.range2.hi << " w=" << raster.spec.width
       << " h=" << raster.spec.height << " k=" << raster.k << " seed=" << raster.seed
       << " fingerprint=" << raster.map_fingerprint << "\n";
    os << "ix,iy,label,settle\n";
    for (int iy = 0; iy < raster.spec.height; ++iy)
        for (int ix = 0; ix < raster.spec.width; ++ix) {
            std::size_t idx = static_cast<std::size_t>(iy) * static_cast<std::size_t>(raster.spec.width) +
                              static_cast<std::size_t>(ix);
            os << ix << "," << iy << "," << raster.labels[idx] << "," << raster.settle[idx] << "\n";
        }
    return os.str();
}

BasinRaster raster_from_csv(const std::string& text) {
    BasinRaster raster;
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line.rfind("# kind=", 0) != 0)
        fail(Errc::io_error, "raster_from_csv: missing header");
    auto grab = [&](const std::string& key) {
        auto pos = line.find(key + "=");
        if (pos == std::string::npos) fail(Errc::io_error, "raster_from_csv: missing field " + key);
        pos += key.size() + 1;
        auto end = line.find(' ', pos);
        return line.substr(pos, end == std::string::npos ? end : end - pos);
    };
    std::string kind = grab("kind");
    for (SliceKind sk :
         {SliceKind::FixBase1, SliceKind::FixBase2, SliceKind::FixFiber, SliceKind::BaseLine})
        if (kind == slice_kind_name(sk)) raster.spec.kind = sk;
    raster.spec.fixed_value = std::stod(grab("fixed"));
    std::string r1 = grab("r1"), r2 = grab("r2");
    raster.spec.range1 = {std::stod(r1.substr(0, r1.find(':'))), std::stod(r1.substr(r1.find(':') + 1))};
    raster.spec.range2 = {std::stod(r2.substr(0, r2.find(':'))), std::stod(r2.substr(r2.find(':') + 1))};
    raster.spec.width = std::stoi(grab("w"));
    raster.spec.height = std::stoi(grab("h"));
    raster.k = std::stoi(grab("k"));
    raster.seed = std::stoull(grab("seed"));
    raster.map_fingerprint = std::stoull(grab("fingerprint"));
    std::getline(is, line); // column header
    std::size_t n = static_cast<std::size_t>(raster.spec.width) *
                    static_cast<std::size_t>(raster.spec.height);
    raster.labels.assign(n, 0);
    raster.settle.assign(n, 0);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        int ix, iy, label, settle;
        if (std::sscanf(line.c_str(), "%d,%d,%d,%d", &ix, &iy, &label, &settle) != 4)
            fail(Errc::io_error, "raster_from_csv: bad row: " + line);
        std::size_t idx = static_cast<std::size_t>(iy) * static_cast<std::size_t>(raster.spec.width) +
                          static_cast<std::size_t>(ix);
        raster.labels[idx] = static_cast<std::int16_t>(label);
        raster.settle[idx] = settle;
    }
    return raster;
}

} // namespace kanlab
