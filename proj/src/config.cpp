#include "kanlab/config.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace kanlab {

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_auto_double(const std::string& v, const std::string& key) {
    if (v == "auto") return -1.0;
    try {
        return std::stod(v);
    } catch (...) {
        fail(Errc::config_error, "config: bad value for " + key + ": " + v);
    }
}

std::string auto_str(double v) {
    if (v < 0.0) return "auto";
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::string dbl_str(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

struct Field {
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

const std::map<std::string, Field>& fields() {
    static const std::map<std::string, Field> table = [] {
        std::map<std::string, Field> f;
        auto add_int = [&](const std::string& k, int RunConfig::* m) {
            f[k] = {[m, k](RunConfig& c, const std::string& v) {
                        try { c.*m = std::stoi(v); } catch (...) { fail(Errc::config_error, "config: bad int for " + k); }
                    },
                    [m](const RunConfig& c) { return std::to_string(c.*m); }};
        };
        auto add_ll = [&](const std::string& k, long long RunConfig::* m) {
            f[k] = {[m, k](RunConfig& c, const std::string& v) {
                        try { c.*m = std::stoll(v); } catch (...) { fail(Errc::config_error, "config: bad int for " + k); }
                    },
                    [m](const RunConfig& c) { return std::to_string(c.*m); }};
        };
        auto add_dbl = [&](const std::string& k, double RunConfig::* m) {
            f[k] = {[m, k](RunConfig& c, const std::string& v) {
                        try { c.*m = std::stod(v); } catch (...) { fail(Errc::config_error, "config: bad number for " + k); }
                    },
                    [m](const RunConfig& c) { return dbl_str(c.*m); }};
        };
        auto add_auto = [&](const std::string& k, double RunConfig::* m) {
            f[k] = {[m, k](RunConfig& c, const std::string& v) { c.*m = parse_auto_double(v, k); },
                    [m](const RunConfig& c) { return auto_str(c.*m); }};
        };
        auto add_str = [&](const std::string& k, std::string RunConfig::* m) {
            f[k] = {[m](RunConfig& c, const std::string& v) { c.*m = v; },
                    [m](const RunConfig& c) { return c.*m; }};
        };

        add_int("matrix_a", &RunConfig::matrix_a);
        add_int("matrix_b", &RunConfig::matrix_b);
        add_int("matrix_c", &RunConfig::matrix_c);
        add_int("matrix_d", &RunConfig::matrix_d);
        add_int("k", &RunConfig::k);
        f["special_indices"] = {
            [](RunConfig& c, const std::string& v) {
                std::istringstream is(v);
                std::string tok;
                int n = 0;
                while (std::getline(is, tok, ',')) {
                    if (n >= 5) fail(Errc::config_error, "config: special_indices needs exactly 5 entries");
                    try { c.special_indices[static_cast<std::size_t>(n++)] = std::stoi(trim(tok)); }
                    catch (...) { fail(Errc::config_error, "config: bad special_indices entry: " + tok); }
                }
                if (n != 5) fail(Errc::config_error, "config: special_indices needs exactly 5 entries");
            },
            [](const RunConfig& c) {
                std::ostringstream os;
                for (int i = 0; i < 5; ++i) os << (i ? "," : "") << c.special_indices[static_cast<std::size_t>(i)];
                return os.str();
            }};
        add_dbl("nu", &RunConfig::nu);
        add_dbl("g_plus", &RunConfig::g_plus);
        add_dbl("u_plus", &RunConfig::u_plus);
        add_dbl("rho_b", &RunConfig::rho_b);
        add_dbl("eps", &RunConfig::eps);
        add_dbl("delta_da", &RunConfig::delta_da);
        add_auto("s0", &RunConfig::s0);
        add_auto("theta_inner", &RunConfig::theta_inner);
        add_auto("theta_outer", &RunConfig::theta_outer);
        add_auto("zeta", &RunConfig::zeta);
        add_auto("delta", &RunConfig::delta);
        add_auto("push_inner", &RunConfig::push_inner);
        add_auto("push_outer", &RunConfig::push_outer);
        add_str("stage", &RunConfig::stage);
        add_int("classify_n_transient", &RunConfig::classify_n_transient);
        add_int("classify_window", &RunConfig::classify_window);
        add_dbl("classify_majority", &RunConfig::classify_majority);
        add_auto("classify_t_tol", &RunConfig::classify_t_tol);
        add_int("classify_n_max", &RunConfig::classify_n_max);
        add_str("sweep_kind", &RunConfig::sweep_kind);
        add_str("slice_kind", &RunConfig::slice_kind);
        add_dbl("slice_fixed", &RunConfig::slice_fixed);
        add_dbl("slice_r1_lo", &RunConfig::slice_r1_lo);
        add_dbl("slice_r1_hi", &RunConfig::slice_r1_hi);
        add_dbl("slice_r2_lo", &RunConfig::slice_r2_lo);
        add_dbl("slice_r2_hi", &RunConfig::slice_r2_hi);
        add_int("slice_w", &RunConfig::slice_w);
        add_int("slice_h", &RunConfig::slice_h);
        add_dbl("slice_jitter", &RunConfig::slice_jitter);
        add_int("box_n1", &RunConfig::box_n1);
        add_int("box_n2", &RunConfig::box_n2);
        add_int("box_n3", &RunConfig::box_n3);
        add_int("validate_samples", &RunConfig::validate_samples);
        add_ll("lyap_n", &RunConfig::lyap_n);
        add_int("lyap_reorth", &RunConfig::lyap_reorth);
        add_int("lyap_points", &RunConfig::lyap_points);
        add_ll("probe_iters", &RunConfig::probe_iters);
        add_int("probe_points", &RunConfig::probe_points);
        add_dbl("probe_min_fraction", &RunConfig::probe_min_fraction);
        add_int("escape_samples", &RunConfig::escape_samples);
        add_int("escape_max_iters", &RunConfig::escape_max_iters);
        f["intermingle_scales"] = {
            [](RunConfig& c, const std::string& v) {
                c.intermingle_scales.clear();
                std::istringstream is(v);
                std::string tok;
                while (std::getline(is, tok, ',')) {
                    try { c.intermingle_scales.push_back(std::stoi(trim(tok))); }
                    catch (...) { fail(Errc::config_error, "config: bad intermingle_scales entry: " + tok); }
                }
                if (c.intermingle_scales.empty())
                    fail(Errc::config_error, "config: intermingle_scales must not be empty");
            },
            [](const RunConfig& c) {
                std::ostringstream os;
                for (std::size_t i = 0; i < c.intermingle_scales.size(); ++i)
                    os << (i ? "," : "") << c.intermingle_scales[i];
                return os.str();
            }};
        add_dbl("intermingle_min_fraction", &RunConfig::intermingle_min_fraction);
        f["seed"] = {[](RunConfig& c, const std::string& v) {
                         try { c.seed = std::stoull(v); } catch (...) { fail(Errc::config_error, "config: bad seed"); }
                     },
                     [](const RunConfig& c) { return std::to_string(c.seed); }};
        add_int("workers", &RunConfig::workers);
        add_str("out_dir", &RunConfig::out_dir);
        return f;
    }();
    return table;
}

void set_key(RunConfig& cfg, const std::string& key, const std::string& value) {
    auto it = fields().find(key);
    if (it == fields().end()) fail(Errc::config_error, "config: unknown key '" + key + "'");
    it->second.set(cfg, value);
}

} // namespace

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::config_error, "config: cannot open " + path);
    RunConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        auto eq = s.find('=');
        if (eq == std::string::npos)
            fail(Errc::config_error, "config: line " + std::to_string(lineno) + " is not key = value");
        set_key(cfg, trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
    }
    return cfg;
}

void apply_override(RunConfig& cfg, const std::string& kv) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) fail(Errc::config_error, "config: override must be key=value: " + kv);
    set_key(cfg, trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
}

std::string canonical_dump(const RunConfig& cfg) {
    std::ostringstream os;
    for (const auto& [key, field] : fields()) os << key << " = " << field.get(cfg) << "\n";
    return os.str();
}

std::uint64_t config_fingerprint(const RunConfig& cfg) {
    // workers and out_dir are execution details; outputs must not depend on them
    std::ostringstream os;
    for (const auto& [key, field] : fields()) {
        if (key == "workers" || key == "out_dir") continue;
        os << key << " = " << field.get(cfg) << "\n";
    }
    return fnv1a64(os.str());
}

void validate_config(const RunConfig& cfg) {
    try {
        build_map(cfg);
        build_classify(cfg);
        if (cfg.sweep_kind == "slice") build_slice(cfg);
        else if (cfg.sweep_kind != "box3")
            fail(Errc::config_error, "config: sweep_kind must be slice or box3");
        if (cfg.workers < 1) fail(Errc::config_error, "config: workers must be >= 1");
    } catch (const Error& e) {
        if (e.code() == Errc::config_error) throw;
        fail(Errc::config_error, std::string("config: ") + e.what());
    }
}

AnosovBase build_anosov(const RunConfig& cfg) {
    return make_anosov(cfg.matrix_a, cfg.matrix_b, cfg.matrix_c, cfg.matrix_d);
}

FiberProfile build_profile(const RunConfig& cfg, const AnosovBase& A) {
    return make_profile(A, cfg.k, cfg.special_indices, cfg.nu, cfg.g_plus, cfg.u_plus, cfg.rho_b);
}

Stage parse_stage(const std::string& name) {
    if (name == "f0") return Stage::F0;
    if (name == "f1") return Stage::F1;
    if (name == "f") return Stage::F;
    fail(Errc::config_error, "config: stage must be f0, f1 or f (got '" + name + "')");
}

LayeredMap build_map(const RunConfig& cfg, Stage stage) {
    AnosovBase A = build_anosov(cfg);
    FiberProfile prof = build_profile(cfg, A);
    SkewMap skew = make_skew_map(A, prof);

    DAParams da = default_da_params(cfg.eps);
    da.delta_da = cfg.delta_da;
    if (cfg.s0 >= 0.0) da.s0 = cfg.s0;
    if (cfg.theta_inner >= 0.0) da.theta_inner = cfg.theta_inner;
    if (cfg.theta_outer >= 0.0) da.theta_outer = cfg.theta_outer;
    if (cfg.zeta >= 0.0) da.zeta = cfg.zeta;

    PushParams push = default_push_params(cfg.eps);
    if (cfg.delta >= 0.0) push.delta = cfg.delta;
    if (cfg.push_inner >= 0.0) push.inner = cfg.push_inner;
    if (cfg.push_outer >= 0.0) push.outer = cfg.push_outer;

    switch (stage) {
        case Stage::F0: return make_layered(skew, std::nullopt, std::nullopt, Stage::F0);
        case Stage::F1: return make_layered(skew, da, std::nullopt, Stage::F1);
        case Stage::F: return make_layered(skew, da, push, Stage::F);
    }
    fail(Errc::config_error, "config: bad stage");
}

LayeredMap build_map(const RunConfig& cfg) { return build_map(cfg, parse_stage(cfg.stage)); }

ClassifyParams build_classify(const RunConfig& cfg) {
    ClassifyParams p;
    p.n_transient = cfg.classify_n_transient;
    p.window = cfg.classify_window;
    p.majority = cfg.classify_majority;
    p.t_tol = cfg.classify_t_tol >= 0.0 ? cfg.classify_t_tol : 0.0;
    p.n_max = cfg.classify_n_max;
    return p;
}

SliceSpec build_slice(const RunConfig& cfg) {
    SliceSpec s;
    if (cfg.slice_kind == "fix_base1") s.kind = SliceKind::FixBase1;
    else if (cfg.slice_kind == "fix_base2") s.kind = SliceKind::FixBase2;
    else if (cfg.slice_kind == "fix_fiber") s.kind = SliceKind::FixFiber;
    else if (cfg.slice_kind == "base_line") s.kind = SliceKind::BaseLine;
    else fail(Errc::config_error, "config: bad slice_kind '" + cfg.slice_kind + "'");
    s.fixed_value = cfg.slice_fixed;
    s.range1 = {cfg.slice_r1_lo, cfg.slice_r1_hi};
    s.range2 = {cfg.slice_r2_lo, cfg.slice_r2_hi};
    s.width = cfg.slice_w;
    s.height = cfg.slice_h;
    s.jitter = cfg.slice_jitter;
    return s;
}

} // namespace kanlab
