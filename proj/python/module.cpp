// Python bindings for the torus-map laboratory: map construction and
// evaluation, the property validators, exponent estimation, basin
// classification and raster sweeps.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kanlab/basin.hpp"
#include "kanlab/config.hpp"

namespace py = pybind11;
using namespace kanlab;

namespace {

Point3 to_point(py::tuple t) {
    if (t.size() != 3) throw py::value_error("point must be a 3-tuple (x1, x2, t)");
    return normalize({t[0].cast<double>(), t[1].cast<double>(), t[2].cast<double>()});
}

py::tuple from_point(Point3 p) { return py::make_tuple(p.x1, p.x2, p.t); }

RunConfig config_from(const std::vector<std::string>& overrides) {
    RunConfig cfg;
    for (const std::string& kv : overrides) apply_override(cfg, kv);
    validate_config(cfg);
    return cfg;
}

py::dict skew_report_dict(const SkewReport& r) {
    py::dict d;
    d["pass"] = r.pass;
    d["deriv_min"] = r.deriv_min;
    d["deriv_max"] = r.deriv_max;
    d["circle_invariance"] = r.circles_fixed.pass;
    d["derivative_pinch"] = r.derivative_pinch.pass;
    d["special_point_signs"] = r.special_signs.pass;
    d["connection_drift"] = r.connection_drift.pass;
    d["contraction_outside_bumps"] = r.contraction_outside.pass;
    d["outside_log_max"] = r.outside_log_max;
    d["inside_log_max"] = r.inside_log_max;
    return d;
}

py::dict surgery_report_dict(const SurgeryReport& r) {
    py::dict d;
    d["pass"] = r.pass;
    d["leaf_preservation"] = r.leaf_preservation.pass;
    d["torus_invariance"] = r.torus_invariance.pass;
    d["cone_min_growth"] = r.cone.min_growth;
    d["cone_invariant_aperture"] = r.cone.invariant_found ? py::cast(r.cone.invariant_aperture)
                                                          : py::cast<py::none>(py::none());
    d["source_rate"] = r.source_rate;
    d["saddle_abs_s"] = r.saddle_abs_s;
    d["outside_factor"] = r.outside_factor;
    d["max_dilatation"] = r.max_dilatation;
    return d;
}

py::dict escape_report_dict(const EscapeReport& r) {
    py::dict d;
    d["pass"] = r.pass;
    d["all_escaped"] = r.all_escaped;
    d["max_exit_steps"] = r.max_exit_steps;
    d["center_exit_steps"] = r.center_exit_steps;
    d["zeta_residence_max"] = r.zeta_residence_max;
    d["distinct_gap_observed"] = r.distinct_gap_observed;
    d["gap_floor"] = r.gap_floor;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "numerical laboratory for layered partially hyperbolic torus maps";

    py::register_exception<Error>(m, "KanlabError");

    py::class_<AnosovBase>(m, "AnosovBase")
        .def_readonly("a", &AnosovBase::a)
        .def_readonly("b", &AnosovBase::b)
        .def_readonly("c", &AnosovBase::c)
        .def_readonly("d", &AnosovBase::d)
        .def_readonly("lambda_u", &AnosovBase::lambda_u)
        .def_readonly("lambda_s", &AnosovBase::lambda_s)
        .def_property_readonly("fixed_points",
                               [](const AnosovBase& A) {
                                   py::list out;
                                   for (Point2 p : A.fixed_pts)
                                       out.append(py::make_tuple(p.x1, p.x2));
                                   return out;
                               })
        .def("apply", [](const AnosovBase& A, double x1, double x2) {
            Point2 img = apply_base(A, {x1, x2});
            return py::make_tuple(img.x1, img.x2);
        });

    m.def("make_anosov", &make_anosov, py::arg("a"), py::arg("b"), py::arg("c"), py::arg("d"));

    py::class_<LayeredMap>(m, "LayeredMap")
        .def_property_readonly("stage",
                               [](const LayeredMap& map) { return std::string(stage_name(map.stage)); })
        .def_property_readonly("k", [](const LayeredMap& map) { return map.skew.profile.k; })
        .def_property_readonly("base", [](const LayeredMap& map) { return map.skew.base; })
        .def_property_readonly("holes",
                               [](const LayeredMap& map) {
                                   py::list out;
                                   for (Point3 h : map.holes) out.append(from_point(h));
                                   return out;
                               })
        .def("apply",
             [](const LayeredMap& map, py::tuple point, bool jacobian) -> py::object {
                 Point3 p = to_point(point);
                 if (!jacobian) return from_point(map.apply(p));
                 Mat3 J;
                 Point3 q = map.apply(p, &J);
                 return py::make_tuple(from_point(q), J);
             },
             py::arg("point"), py::arg("jacobian") = false)
        .def("iterate",
             [](const LayeredMap& map, py::tuple point, long long n) {
                 return from_point(iterate_orbit(map, to_point(point), n));
             },
             py::arg("point"), py::arg("n"))
        .def("cs_area",
             [](const LayeredMap& map, py::tuple point) {
                 return cs_area_jacobian(map, to_point(point));
             },
             py::arg("point"))
        .def("lyapunov",
             [](const LayeredMap& map, py::tuple point, long long n, int reorth,
                std::uint64_t seed) {
                 LyapunovEstimate est = lyapunov_spectrum(map, to_point(point), n, reorth, seed);
                 py::dict d;
                 d["exponents"] = est.exponents;
                 d["stderrs"] = est.stderrs;
                 d["iterations"] = est.iterations;
                 return d;
             },
             py::arg("point"), py::arg("n") = 100000, py::arg("reorth") = 5,
             py::arg("seed") = 12345)
        .def("classify",
             [](const LayeredMap& map, py::tuple point, int n_transient, int window,
                double majority, double t_tol, int n_max) {
                 ClassifyParams params{n_transient, window, majority, t_tol, n_max};
                 BasinLabel lab = classify_basin(map, to_point(point), params);
                 return py::make_tuple(lab.label, lab.settle_time);
             },
             py::arg("point"), py::arg("n_transient") = 20000, py::arg("window") = 2000,
             py::arg("majority") = 0.9, py::arg("t_tol") = 0.0, py::arg("n_max") = 200000)
        .def("scan_saddles",
             [](const LayeredMap& map, int hole) {
                 py::list out;
                 for (const AxisFixedPoint& f : scan_saddle_structure(map, hole))
                     out.append(py::make_tuple(f.s, f.derivative, f.attracting));
                 return out;
             },
             py::arg("hole"))
        .def("validate_skew",
             [](const LayeredMap& map, int samples, std::uint64_t seed) {
                 return skew_report_dict(validate_skew_properties(map.skew, samples, seed));
             },
             py::arg("samples") = 2000, py::arg("seed") = 12345)
        .def("validate_surgery",
             [](const LayeredMap& map, int samples, std::uint64_t seed) {
                 return surgery_report_dict(validate_surgery(map, samples, seed));
             },
             py::arg("samples") = 2000, py::arg("seed") = 12345)
        .def("validate_escape",
             [](const LayeredMap& map, int samples, std::uint64_t seed, int max_iters) {
                 return escape_report_dict(validate_escape(map, samples, seed, max_iters));
             },
             py::arg("samples") = 500, py::arg("seed") = 12345, py::arg("max_iters") = 2000)
        .def("certificate",
             [](const LayeredMap& map, int n0, int n1, int samples, std::uint64_t seed) {
                 CertificateReport c = volume_certificate(map, n0, n1, samples, seed);
                 py::dict d;
                 d["N0"] = c.N0;
                 d["N1"] = c.N1;
                 d["max_dilatation"] = c.max_dilatation;
                 d["outside_factor"] = c.outside_factor;
                 d["product"] = c.product;
                 d["pass"] = c.pass;
                 return d;
             },
             py::arg("n0"), py::arg("n1"), py::arg("samples") = 2000, py::arg("seed") = 12345)
        .def("disk_probe",
             [](const LayeredMap& map, py::tuple seed_point, int n_points, long long n_iters,
                std::uint64_t seed) {
                 DiskProbeResult r =
                     unstable_disk_probe(map, to_point(seed_point), n_points, n_iters, seed);
                 py::dict d;
                 d["fraction_negative"] = r.fraction_negative;
                 d["curve_length"] = r.curve_length;
                 d["worst_exponent"] = r.worst_exponent;
                 return d;
             },
             py::arg("seed_point"), py::arg("n_points") = 100, py::arg("n_iters") = 4000,
             py::arg("seed") = 12345);

    m.def(
        "make_map",
        [](const std::string& stage, const std::vector<std::string>& overrides) {
            RunConfig cfg = config_from(overrides);
            cfg.stage = stage;
            return build_map(cfg);
        },
        py::arg("stage") = "f", py::arg("overrides") = std::vector<std::string>{},
        "Build a map at stage 'f0', 'f1' or 'f'; overrides are config key=value strings.");

    m.def(
        "sweep",
        [](const LayeredMap& map, const std::string& kind, double fixed_value, int width,
           int height, int workers, std::uint64_t seed, int n_transient, int window, int n_max) {
            SliceSpec spec;
            if (kind == "fix_base1") spec.kind = SliceKind::FixBase1;
            else if (kind == "fix_base2") spec.kind = SliceKind::FixBase2;
            else if (kind == "fix_fiber") spec.kind = SliceKind::FixFiber;
            else if (kind == "base_line") spec.kind = SliceKind::BaseLine;
            else throw py::value_error("kind must be fix_base1|fix_base2|fix_fiber|base_line");
            spec.fixed_value = fixed_value;
            spec.width = width;
            spec.height = height;
            ClassifyParams params;
            params.n_transient = n_transient;
            params.window = window;
            params.n_max = n_max;
            BasinRaster raster = sweep_raster(map, spec, params, workers, seed);
            py::dict d;
            d["labels"] = raster.labels;
            d["settle"] = raster.settle;
            d["width"] = raster.spec.width;
            d["height"] = raster.spec.height;
            d["ppm"] = py::bytes(render_ppm(raster, default_palette(raster.k)));
            return d;
        },
        py::arg("map"), py::arg("kind") = "fix_base1", py::arg("fixed_value") = 0.5,
        py::arg("width") = 64, py::arg("height") = 64, py::arg("workers") = 1,
        py::arg("seed") = 12345, py::arg("n_transient") = 20000, py::arg("window") = 2000,
        py::arg("n_max") = 200000);
}
