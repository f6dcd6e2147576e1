#include "doctest.h"

#include <cstdlib>
#include <fstream>

#include "kanlab/config.hpp"

using namespace kanlab;

namespace {

std::string write_temp(const std::string& content) {
    std::string path = "test_config_tmp.cfg";
    std::ofstream out(path);
    out << content;
    return path;
}

} // namespace

TEST_CASE("config files parse, unknown keys are rejected") {
    std::string path = write_temp(
        "# comment\n"
        "k = 12\n"
        "eps = 0.01\n"
        "stage = f1\n"
        "special_indices = 0, 2, 4, 5, 6\n"
        "intermingle_scales = 2,4\n");
    RunConfig cfg = parse_config_file(path);
    CHECK(cfg.k == 12);
    CHECK(cfg.eps == 0.01);
    CHECK(cfg.stage == "f1");
    CHECK(cfg.special_indices[1] == 2);
    CHECK(cfg.intermingle_scales == std::vector<int>{2, 4});
    std::remove(path.c_str());

    std::string bad = write_temp("no_such_key = 1\n");
    CHECK_THROWS_AS(static_cast<void>(parse_config_file(bad)), Error);
    std::remove(bad.c_str());

    std::string malformed = write_temp("just a line\n");
    CHECK_THROWS_AS(static_cast<void>(parse_config_file(malformed)), Error);
    std::remove(malformed.c_str());
}

TEST_CASE("overrides and the fingerprint") {
    RunConfig cfg;
    std::uint64_t base = config_fingerprint(cfg);
    CHECK(config_fingerprint(cfg) == base); // stable

    apply_override(cfg, "seed=999");
    CHECK(cfg.seed == 999);
    CHECK(config_fingerprint(cfg) != base);

    apply_override(cfg, "s0=auto");
    CHECK(cfg.s0 == -1.0);
    CHECK_THROWS_AS(apply_override(cfg, "bogus=1"), Error);
    CHECK_THROWS_AS(apply_override(cfg, "nooequals"), Error);
}

TEST_CASE("default config builds every stage") {
    RunConfig cfg;
    for (const char* st : {"f0", "f1", "f"}) {
        cfg.stage = st;
        CHECK_NOTHROW(validate_config(cfg));
        LayeredMap map = build_map(cfg);
        CHECK(stage_name(map.stage) == std::string(st));
    }
    CHECK(build_map(cfg).da->s0 == doctest::Approx(0.045 * cfg.eps));
}

TEST_CASE("invalid circle count is a config error") {
    RunConfig cfg;
    apply_override(cfg, "k=5");
    try {
        validate_config(cfg);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::config_error);
        CHECK(std::string(e.what()).find("multiple of 6") != std::string::npos);
    }
}

TEST_CASE("stage names parse strictly") {
    CHECK(parse_stage("f0") == Stage::F0);
    CHECK(parse_stage("f1") == Stage::F1);
    CHECK(parse_stage("f") == Stage::F);
    CHECK_THROWS_AS(static_cast<void>(parse_stage("F0")), Error);
}
