// kanlab: construct the layered torus maps, validate their properties, probe
// exponents and basins, sweep rasters and volumes, and assemble the volume
// hyperbolicity certificate.
//
// Exit codes: 0 = pass, 1 = a hard criterion failed, 2 = configuration error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "kanlab/config.hpp"
#include "kanlab/rng.hpp"

namespace fs = std::filesystem;
using namespace kanlab;

namespace {

struct CliOptions {
    std::string config_path;
    std::vector<std::string> overrides;
    int workers = -1;
    long long seed = -1;
    std::string out_dir;
    std::string golden;
    std::string raster_in;
};

RunConfig load_config(const CliOptions& opt) {
    RunConfig cfg;
    if (!opt.config_path.empty()) cfg = parse_config_file(opt.config_path);
    for (const std::string& kv : opt.overrides) apply_override(cfg, kv);
    if (opt.workers > 0) cfg.workers = opt.workers;
    if (opt.seed >= 0) cfg.seed = static_cast<std::uint64_t>(opt.seed);
    if (!opt.out_dir.empty()) cfg.out_dir = opt.out_dir;
    validate_config(cfg);
    return cfg;
}

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(Errc::io_error, "cannot write " + path.string());
    out << content;
}

void write_manifest(const RunConfig& cfg, const std::string& command) {
    std::ostringstream os;
    os << "command = " << command << "\n";
    os << "fingerprint = " << config_fingerprint(cfg) << "\n";
    os << "defaults_version = 1\n";
    os << canonical_dump(cfg);
    write_file(fs::path(cfg.out_dir) / "manifest.txt", os.str());
}

int run_validate(const RunConfig& cfg) {
    Stage stage = parse_stage(cfg.stage);
    bool ok = true;

    LayeredMap map = build_map(cfg, stage);
    SkewReport skew_rep = validate_skew_properties(map.skew, cfg.validate_samples, cfg.seed);
    write_file(fs::path(cfg.out_dir) / "skew_properties.txt", skew_rep.to_text());
    std::cout << "skew properties: " << (skew_rep.pass ? "pass" : "FAIL") << "\n";
    ok = ok && skew_rep.pass;

    if (stage != Stage::F0) {
        LayeredMap f1 = build_map(cfg, Stage::F1);
        SurgeryReport rep = validate_surgery(f1, cfg.validate_samples, cfg.seed);
        write_file(fs::path(cfg.out_dir) / "surgery_properties.txt", rep.to_text());
        std::cout << "surgery properties: " << (rep.pass ? "pass" : "FAIL") << "\n";
        ok = ok && rep.pass;
    }
    if (stage == Stage::F) {
        EscapeReport rep = validate_escape(map, cfg.escape_samples, cfg.seed, cfg.escape_max_iters);
        write_file(fs::path(cfg.out_dir) / "escape.txt", rep.to_text());
        std::cout << "escape: " << (rep.pass ? "pass" : "FAIL") << "\n";
        ok = ok && rep.pass;
    }
    return ok ? 0 : 1;
}

int run_lyap(const RunConfig& cfg) {
    LayeredMap map = build_map(cfg);
    double expect = std::log(map.skew.base.lambda_u);
    std::ostringstream csv;
    csv << "point,x1,x2,t,exp1,exp2,exp3,err1,err2,err3\n";
    bool ok = true;
    SplitMix64 rng = stream_rng(cfg.seed, 0xA11CE);
    for (int i = 0; i < cfg.lyap_points; ++i) {
        Point3 p{rng.next_unit(), rng.next_unit(), rng.next_unit()};
        LyapunovEstimate est = lyapunov_spectrum(map, p, cfg.lyap_n, cfg.lyap_reorth, cfg.seed);
        csv << i << "," << p.x1 << "," << p.x2 << "," << p.t;
        for (double e : est.exponents) csv << "," << e;
        for (double s : est.stderrs) csv << "," << s;
        csv << "\n";
        if (std::fabs(est.exponents[0] - expect) > 0.01 * expect) ok = false;
    }
    write_file(fs::path(cfg.out_dir) / "lyapunov.csv", csv.str());
    std::cout << "lyapunov top exponent vs log(lambda_u): " << (ok ? "pass" : "FAIL") << "\n";
    return ok ? 0 : 1;
}

int run_probe(const RunConfig& cfg) {
    LayeredMap map = build_map(cfg);
    const int k = map.skew.profile.k;
    std::ostringstream csv;
    csv << "attractor,fraction_negative,curve_length,worst_exponent\n";
    bool ok = true;
    SplitMix64 rng = stream_rng(cfg.seed, 0xD15C);
    for (int i = 0; i < k; ++i) {
        // settle a generic point onto the attractor of circle i first
        Point3 p{rng.next_unit(), rng.next_unit(), map.skew.profile.circle_t(i)};
        p = iterate_orbit(map, p, 200);
        DiskProbeResult res =
            unstable_disk_probe(map, p, cfg.probe_points, cfg.probe_iters, cfg.seed + i);
        csv << (i + 1) << "," << res.fraction_negative << "," << res.curve_length << ","
            << res.worst_exponent << "\n";
        if (res.fraction_negative < cfg.probe_min_fraction) ok = false;
    }
    write_file(fs::path(cfg.out_dir) / "probe.csv", csv.str());
    std::cout << "mostly-contracting probe: " << (ok ? "pass" : "FAIL") << "\n";
    return ok ? 0 : 1;
}

int run_sweep(const RunConfig& cfg, const CliOptions& opt) {
    LayeredMap map = build_map(cfg);
    ClassifyParams params = build_classify(cfg);
    if (cfg.sweep_kind == "box3") {
        Box3Result res =
            sweep_box3(map, {cfg.box_n1, cfg.box_n2, cfg.box_n3}, params, cfg.workers, cfg.seed);
        res.map_fingerprint = config_fingerprint(cfg);
        MeasureReport m = measure_report(res.labels, res.settle, res.k);
        write_file(fs::path(cfg.out_dir) / "measure.txt", m.to_text());
        std::cout << m.to_text();
        return 0;
    }
    SliceSpec spec = build_slice(cfg);
    BasinRaster raster = sweep_raster(map, spec, params, cfg.workers, cfg.seed);
    raster.map_fingerprint = config_fingerprint(cfg);
    std::string ppm = render_ppm(raster, default_palette(raster.k));
    write_file(fs::path(cfg.out_dir) / "raster.ppm", ppm);
    write_file(fs::path(cfg.out_dir) / "raster.csv", raster_to_csv(raster));
    MeasureReport m = measure_report(raster.labels, raster.settle, raster.k);
    write_file(fs::path(cfg.out_dir) / "measure.txt", m.to_text());
    if (!opt.golden.empty()) {
        std::ifstream in(opt.golden, std::ios::binary);
        if (!in) fail(Errc::config_error, "missing golden file " + opt.golden);
        std::stringstream buf;
        buf << in.rdbuf();
        if (buf.str() != ppm) {
            std::cout << "golden mismatch against " << opt.golden << "\n";
            return 1;
        }
        std::cout << "golden match\n";
    }
    return 0;
}

int run_intermingle(const RunConfig& cfg, const CliOptions& opt) {
    BasinRaster raster;
    if (!opt.raster_in.empty()) {
        std::ifstream in(opt.raster_in, std::ios::binary);
        if (!in) fail(Errc::config_error, "cannot open raster " + opt.raster_in);
        std::stringstream buf;
        buf << in.rdbuf();
        raster = raster_from_csv(buf.str());
    } else {
        LayeredMap map = build_map(cfg);
        raster = sweep_raster(map, build_slice(cfg), build_classify(cfg), cfg.workers, cfg.seed);
        raster.map_fingerprint = config_fingerprint(cfg);
    }
    IntermingleReport rep =
        intermingle_report(raster, cfg.intermingle_scales, cfg.intermingle_min_fraction);
    write_file(fs::path(cfg.out_dir) / "intermingle.csv", rep.to_csv());
    if (raster.spec.kind != SliceKind::FixFiber) {
        std::ostringstream os;
        for (std::size_t s = 0; s < rep.per_scale.size(); ++s) {
            BandCheck bc = band_coverage_check(raster, rep, static_cast<int>(s));
            os << "scale_" << cfg.intermingle_scales[s] << "_band_boxes = " << bc.boxes_checked
               << "\n";
            os << "scale_" << cfg.intermingle_scales[s]
               << "_band_pass = " << (bc.pass ? "true" : "false") << "\n";
            if (!bc.first_failure.empty())
                os << "scale_" << cfg.intermingle_scales[s] << "_band_failure = " << bc.first_failure
                   << "\n";
        }
        write_file(fs::path(cfg.out_dir) / "band_check.txt", os.str());
        std::cout << os.str();
    }
    return 0;
}

int run_certify(const RunConfig& cfg) {
    if (parse_stage(cfg.stage) != Stage::F)
        fail(Errc::config_error, "certify requires stage = f");
    LayeredMap map = build_map(cfg);
    EscapeReport esc = validate_escape(map, cfg.escape_samples, cfg.seed, cfg.escape_max_iters);
    write_file(fs::path(cfg.out_dir) / "escape.txt", esc.to_text());
    CertificateReport cert = volume_certificate(map, esc.zeta_residence_max, esc.gap_floor,
                                                cfg.validate_samples, cfg.seed);
    write_file(fs::path(cfg.out_dir) / "certificate.txt", cert.to_text());
    std::cout << cert.to_text();
    return esc.pass && cert.pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for layered torus diffeomorphisms"};
    app.require_subcommand(1);

    CliOptions opt;
    app.add_option("--config", opt.config_path, "configuration file of key = value lines");
    app.add_option("--set", opt.overrides, "override a configuration key (key=value, repeatable)");
    app.add_option("--workers", opt.workers, "worker thread count");
    app.add_option("--seed", opt.seed, "random seed");
    app.add_option("--out", opt.out_dir, "output directory");
    app.add_option("--golden", opt.golden, "compare the sweep PPM byte-for-byte to this file");
    app.add_option("--raster", opt.raster_in, "existing raster CSV for the intermingle report");

    auto* c_validate = app.add_subcommand("validate", "run the per-stage property validators");
    auto* c_lyap = app.add_subcommand("lyap", "Lyapunov spectra at random points");
    auto* c_probe = app.add_subcommand("probe", "mostly-contracting unstable disk probes");
    auto* c_sweep = app.add_subcommand("sweep", "classify a slice raster or 3-D grid");
    auto* c_inter = app.add_subcommand("intermingle", "per-box label statistics of a sweep");
    auto* c_certify = app.add_subcommand("certify", "escape analysis plus the volume certificate");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        RunConfig cfg = load_config(opt);
        std::string cmd = app.get_subcommands().front()->get_name();
        write_manifest(cfg, cmd);
        if (c_validate->parsed()) return run_validate(cfg);
        if (c_lyap->parsed()) return run_lyap(cfg);
        if (c_probe->parsed()) return run_probe(cfg);
        if (c_sweep->parsed()) return run_sweep(cfg, opt);
        if (c_inter->parsed()) return run_intermingle(cfg, opt);
        if (c_certify->parsed()) return run_certify(cfg);
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code() == Errc::config_error || e.code() == Errc::io_error ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
