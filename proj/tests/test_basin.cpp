#include "doctest.h"

#include <set>

#include "kanlab/basin.hpp"
#include "kanlab/rng.hpp"

using namespace kanlab;

namespace {

LayeredMap stage_map(Stage stage) {
    AnosovBase A = make_anosov(8, 7, 1, 1);
    FiberProfile prof = make_profile(A, 6, {0, 1, 2, 3, 4}, 0.1, 0.05, 0.002, 0.04);
    SkewMap skew = make_skew_map(A, prof);
    DAParams da = default_da_params(0.02);
    PushParams push = default_push_params(0.02);
    if (stage == Stage::F0) return make_layered(skew, std::nullopt, std::nullopt, stage);
    if (stage == Stage::F1) return make_layered(skew, da, std::nullopt, stage);
    return make_layered(skew, da, push, stage);
}

ClassifyParams quick_params() { return {2000, 500, 0.9, 0.0, 30000}; }

} // namespace

TEST_CASE("sweep of an invariant torus at stage f1 is single-label") {
    LayeredMap f1 = stage_map(Stage::F1);
    SliceSpec spec;
    spec.kind = SliceKind::FixFiber;
    spec.fixed_value = f1.skew.profile.circle_t(2);
    spec.range1 = {0.3, 0.45}; // window away from the hole base point
    spec.range2 = {0.3, 0.45};
    spec.width = 16;
    spec.height = 16;
    BasinRaster raster = sweep_raster(f1, spec, quick_params(), 2, 7);
    for (auto l : raster.labels) CHECK(l == 3);
}

TEST_CASE("sweeps are byte-identical across worker counts") {
    LayeredMap f = stage_map(Stage::F);
    SliceSpec spec;
    spec.kind = SliceKind::FixBase1;
    spec.fixed_value = 0.5;
    spec.width = 16;
    spec.height = 16;
    BasinRaster one = sweep_raster(f, spec, quick_params(), 1, 99);
    BasinRaster four = sweep_raster(f, spec, quick_params(), 4, 99);
    CHECK(one.labels == four.labels);
    CHECK(one.settle == four.settle);
    CHECK(render_ppm(one, default_palette(one.k)) == render_ppm(four, default_palette(four.k)));
    CHECK(raster_to_csv(one) == raster_to_csv(four));
}

TEST_CASE("ppm bytes follow the P6 contract") {
    BasinRaster raster;
    raster.spec.kind = SliceKind::FixBase1;
    raster.spec.width = 16;
    raster.spec.height = 16;
    raster.k = 6;
    raster.labels.assign(256, 0);
    raster.labels[0] = 1; // pixel (0,0): bottom-left, last PPM row
    raster.settle.assign(256, 0);

    std::vector<Rgb> pal = default_palette(6);
    pal[1] = {255, 0, 0};
    std::string ppm = render_ppm(raster, pal);
    const std::string header = "P6\n16 16\n255\n";
    REQUIRE(ppm.substr(0, header.size()) == header);
    CHECK(ppm.size() == header.size() + 256 * 3);
    // bottom row written last
    std::size_t last_row = header.size() + 15 * 16 * 3;
    CHECK(static_cast<unsigned char>(ppm[last_row]) == 255);
    CHECK(static_cast<unsigned char>(ppm[last_row + 1]) == 0);
    CHECK(static_cast<unsigned char>(ppm[header.size()]) == 0);

    std::vector<Rgb> short_pal(pal.begin(), pal.begin() + 3);
    CHECK_THROWS_AS(static_cast<void>(render_ppm(raster, short_pal)), Error);
}

TEST_CASE("measure report conserves mass") {
    std::vector<std::int16_t> labels{1, 1, 2, 0, 3, 3, 3, 2};
    std::vector<std::int32_t> settle{10, 20, 30, 40, 50, 60, 70, 80};
    MeasureReport rep = measure_report(labels, settle, 6);
    double sum = 0.0;
    for (double f : rep.fractions) sum += f;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.fractions[1] == doctest::Approx(0.25));
    CHECK(rep.mean_settle[1] == doctest::Approx(15.0));
    CHECK(rep.fractions[0] == doctest::Approx(0.125));

    CHECK_THROWS_AS(static_cast<void>(measure_report({}, {}, 6)), Error);
}

TEST_CASE("intermingle histograms conserve cells and nest across scales") {
    // synthetic raster with a deterministic pseudo-random label field
    BasinRaster raster;
    raster.spec.width = 64;
    raster.spec.height = 64;
    raster.k = 6;
    raster.labels.resize(64 * 64);
    raster.settle.assign(64 * 64, 1);
    SplitMix64 rng(1234);
    for (auto& l : raster.labels) l = static_cast<std::int16_t>(rng.next_u64() % 7);

    IntermingleReport rep = intermingle_report(raster, {2, 4, 8}, 0.01);
    for (std::size_t s = 0; s < rep.per_scale.size(); ++s) {
        const ScaleReport& sr = rep.per_scale[s];
        for (const BoxStat& b : sr.boxes) {
            std::int64_t total = 0;
            for (auto c : b.counts) total += c;
            CHECK(total == sr.box_w * sr.box_h);
        }
    }

    // the label SET (count > 0) of a parent box equals the union over children
    const ScaleReport& coarse = rep.per_scale[1]; // 4x4
    const ScaleReport& fine = rep.per_scale[2];   // 8x8
    for (const BoxStat& parent : coarse.boxes) {
        std::set<int> parent_set, child_union;
        for (int l = 0; l <= 6; ++l)
            if (parent.counts[static_cast<std::size_t>(l)] > 0) parent_set.insert(l);
        for (const BoxStat& child : fine.boxes) {
            if (child.bx / 2 != parent.bx || child.by / 2 != parent.by) continue;
            for (int l = 0; l <= 6; ++l)
                if (child.counts[static_cast<std::size_t>(l)] > 0) child_union.insert(l);
        }
        CHECK(parent_set == child_union);
    }

    CHECK_THROWS_AS(static_cast<void>(intermingle_report(raster, {3}, 0.01)), Error);
}

TEST_CASE("raster csv round trips") {
    LayeredMap f1 = stage_map(Stage::F1);
    SliceSpec spec;
    spec.kind = SliceKind::FixFiber;
    spec.fixed_value = f1.skew.profile.circle_t(0);
    spec.width = 16;
    spec.height = 16;
    BasinRaster raster = sweep_raster(f1, spec, quick_params(), 2, 5);
    BasinRaster back = raster_from_csv(raster_to_csv(raster));
    CHECK(back.labels == raster.labels);
    CHECK(back.settle == raster.settle);
    CHECK(back.spec.width == raster.spec.width);
    CHECK(back.k == raster.k);
    CHECK(raster_to_csv(back) == raster_to_csv(raster));
}

TEST_CASE("box3 sweep on a single cell classifies one point") {
    LayeredMap f1 = stage_map(Stage::F1);
    Box3Result res = sweep_box3(f1, {1, 1, 1}, quick_params(), 1, 3);
    CHECK(res.labels.size() == 1);
    // center (0.5, 0.5, 0.5) sits between circles 2 and 3 on an f1-invariant band
    CHECK((res.labels[0] == 3 || res.labels[0] == 4 || res.labels[0] == 0));
}

TEST_CASE("default palette distinguishes all labels") {
    std::vector<Rgb> pal = default_palette(6);
    REQUIRE(pal.size() == 7);
    std::set<std::array<std::uint8_t, 3>> uniq(pal.begin(), pal.end());
    CHECK(uniq.size() == 7);
}
