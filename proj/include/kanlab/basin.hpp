#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "kanlab/dynamics.hpp"

namespace kanlab {

enum class SliceKind { FixBase1, FixBase2, FixFiber, BaseLine };

const char* slice_kind_name(SliceKind k);

struct Range {
    double lo = 0.0, hi = 1.0;
};

// A 2-D window onto T^3.  Axis 1 is the raster x direction, axis 2 the y
// direction; pixel centers sample the open cell grid.  BaseLine scans
// (arclength along the unstable line through (fixed_value, 0)) x (fiber).
struct SliceSpec {
    SliceKind kind = SliceKind::FixBase1;
    double fixed_value = 0.5;
    Range range1, range2;
    int width = 256, height = 256;
    double jitter = 0.0; // 0 = cell centers (reproducible default)
};

Point3 slice_point(const SliceSpec& spec, const AnosovBase& A, double a1, double a2);

struct BasinRaster {
    SliceSpec spec;
    int k = 0;
    ClassifyParams params;
    std::uint64_t seed = 0;
    std::uint64_t map_fingerprint = 0;
    std::vector<std::int16_t> labels; // row-major, iy*width+ix, 0 = unresolved
    std::vector<std::int32_t> settle;

    std::int16_t label_at(int ix, int iy) const {
        return labels[static_cast<std::size_t>(iy) * static_cast<std::size_t>(spec.width) +
                      static_cast<std::size_t>(ix)];
    }
};

BasinRaster sweep_raster(const LayeredMap& map, const SliceSpec& spec, const ClassifyParams& params,
                         int workers, std::uint64_t seed);

struct Box3Result {
    std::array<int, 3> dims{};
    int k = 0;
    ClassifyParams params;
    std::uint64_t seed = 0;
    std::uint64_t map_fingerprint = 0;
    std::vector<std::int16_t> labels; // index = (iz*n2 + iy)*n1 + ix
    std::vector<std::int32_t> settle;
};

Box3Result sweep_box3(const LayeredMap& map, std::array<int, 3> dims, const ClassifyParams& params,
                      int workers, std::uint64_t seed);

struct MeasureReport {
    int k = 0;
    std::size_t cells = 0;
    std::vector<double> fractions;    // size k+1, index 0 = unresolved
    std::vector<double> mean_settle;  // size k+1
    std::string to_text() const;
};

MeasureReport measure_report(const std::vector<std::int16_t>& labels,
                             const std::vector<std::int32_t>& settle, int k);

struct BoxStat {
    int bx = 0, by = 0;
    std::vector<std::int64_t> counts; // size k+1
    std::vector<int> present;         // labels with fraction >= min_fraction
};

struct ScaleReport {
    int boxes_x = 0, boxes_y = 0;
    int box_w = 0, box_h = 0;
    std::vector<BoxStat> boxes;
};

struct IntermingleReport {
    double min_fraction = 0.01;
    int k = 0;
    std::vector<int> scales;
    std::vector<ScaleReport> per_scale;
    std::string to_csv() const;
};

// scales = number of boxes per axis (e.g. {4, 8, 16}); each must divide the
// raster resolution.
IntermingleReport intermingle_report(const BasinRaster& raster, const std::vector<int>& scales,
                                     double min_fraction);

// Criterion helper for fiber-vertical slices: inside every band, each box
// fully contained in the band must show both adjacent labels.
struct BandCheck {
    bool pass = false;
    int boxes_checked = 0;
    std::string first_failure;
};

BandCheck band_coverage_check(const BasinRaster& raster, const IntermingleReport& report,
                              int scale_index);

using Rgb = std::array<std::uint8_t, 3>;

std::vector<Rgb> default_palette(int k);

// Binary PPM (P6, maxval 255), rows written top to bottom (iy = height-1 first).
std::string render_ppm(const BasinRaster& raster, const std::vector<Rgb>& palette);

std::string raster_to_csv(const BasinRaster& raster);
BasinRaster raster_from_csv(const std::string& text);

} // namespace kanlab
