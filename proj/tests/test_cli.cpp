#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#ifndef KANLAB_CLI_PATH
#define KANLAB_CLI_PATH "kanlab"
#endif

namespace {

int run_cli(const std::string& args) {
    std::string cmd = std::string(KANLAB_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("config errors exit with status 2") {
    CHECK(run_cli("--set k=5 validate --out cli_tmp_k5") == 2);
    CHECK(run_cli("--set bogus=1 validate --out cli_tmp_bogus") == 2);
    CHECK(run_cli("nosuchcommand") == 2);
    CHECK(run_cli("--config /no/such/file.cfg validate") == 2);
}

TEST_CASE("a quick stage-f0 validate run passes and writes its reports") {
    int rc = run_cli(
        "--set stage=f0 --set validate_samples=2000 --seed 7 --out cli_tmp_f0 validate");
    CHECK(rc == 0);
    CHECK(!slurp("cli_tmp_f0/skew_properties.txt").empty());
    std::string manifest = slurp("cli_tmp_f0/manifest.txt");
    CHECK(manifest.find("fingerprint = ") != std::string::npos);
    CHECK(manifest.find("seed = 7") != std::string::npos);
    std::system("rm -rf cli_tmp_f0");
}

TEST_CASE("sweep ppm bytes are identical for 1 and 4 workers") {
    std::string common =
        "--set stage=f1 --set slice_kind=fix_fiber --set slice_fixed=0.0 "
        "--set slice_w=16 --set slice_h=16 --set classify_n_transient=500 "
        "--set classify_window=200 --set classify_n_max=4000 --seed 11 sweep";
    CHECK(run_cli("--workers 1 --out cli_tmp_w1 " + common) == 0);
    CHECK(run_cli("--workers 4 --out cli_tmp_w4 " + common) == 0);
    std::string a = slurp("cli_tmp_w1/raster.ppm");
    std::string b = slurp("cli_tmp_w4/raster.ppm");
    CHECK(!a.empty());
    CHECK(a == b);
    CHECK(slurp("cli_tmp_w1/raster.csv") == slurp("cli_tmp_w4/raster.csv"));
    // golden self-check: comparing a run against its own output matches
    CHECK(run_cli("--workers 2 --out cli_tmp_w2 --golden cli_tmp_w1/raster.ppm " + common) == 0);
    // a missing golden file is a config error
    CHECK(run_cli("--workers 2 --out cli_tmp_w2 --golden /no/such.ppm " + common) == 2);
    std::system("rm -rf cli_tmp_w1 cli_tmp_w4 cli_tmp_w2");
}
