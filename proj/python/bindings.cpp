#include "metlab/harness.hpp"
#include "metlab/opstats.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#define STRINGIFY(x) #x
#define MACRO_STRINGIFY(x) STRINGIFY(x)

namespace py = pybind11;
using namespace metlab;

namespace {

NormSpec parse_norm(const std::string& name) {
    if (name == "L1") return NormSpec::l1();
    if (name == "L2") return NormSpec::l2();
    if (name == "Linf") return NormSpec::linf();
    throw py::value_error("norm must be one of L1, L2, Linf");
}

Method parse_method(const std::string& m) {
    if (m == "auto") return Method::automatic;
    if (m == "closed_form") return Method::closed_form;
    if (m == "optimized") return Method::optimized;
    if (m == "enumerated") return Method::enumerated;
    throw py::value_error("method must be one of auto, closed_form, optimized, enumerated");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "metlab core: norms, growth statistics and Oseledets decompositions";

    m.def("norm", [](const Vec& x, const std::string& n) { return metlab::norm(x, parse_norm(n)); }, py::arg("x"),
          py::arg("norm") = "L2");
    m.def("operator_norm", [](const Mat& T, const std::string& n) { return operator_norm(T, parse_norm(n)); },
          py::arg("T"), py::arg("norm") = "L2");
    m.def(
        "bernstein",
        [](const Mat& T, int k, const std::string& n, const std::string& method) {
            return bernstein(T, k, parse_norm(n), parse_method(method)).value;
        },
        py::arg("T"), py::arg("k"), py::arg("norm") = "L2", py::arg("method") = "auto");
    m.def(
        "gelfand",
        [](const Mat& T, int k, const std::string& n) { return gelfand(T, k, parse_norm(n)); }, py::arg("T"),
        py::arg("k"), py::arg("norm") = "L2");
    m.def(
        "hausdorff_distance",
        [](const Mat& V, const Mat& W, const std::string& n) {
            return hausdorff_distance(Subspace::span(V), Subspace::span(W), parse_norm(n));
        },
        py::arg("V"), py::arg("W"), py::arg("norm") = "L2");
    m.def(
        "oblique_projection",
        [](const Mat& U, const Mat& V) { return oblique_projection(Subspace::span(U), Subspace::span(V)).matrix; },
        py::arg("U"), py::arg("V"));

    m.def("catalog_names", &catalog_names);
    m.def(
        "build_scenario", [](const std::string& name, std::uint64_t seed) { return to_json(build_scenario(name, seed)).dump(); },
        py::arg("name"), py::arg("seed") = 1, "scenario spec as a JSON string");
    m.def(
        "run",
        [](const std::string& spec_json, int threads) {
            ScenarioSpec spec = spec_from_json(io::json::parse(spec_json));
            Report r;
            {
                py::gil_scoped_release release;
                r = run(spec, {threads});
            }
            return to_json(r).dump();
        },
        py::arg("spec_json"), py::arg("threads") = 1, "run a scenario; returns the report as a JSON string");
    m.def(
        "emit_plotdata",
        [](const std::string& report_json, const std::string& trace) {
            return emit_plotdata(report_from_json(io::json::parse(report_json)), trace);
        },
        py::arg("report_json"), py::arg("trace"));
    m.def("criterion_name", &criterion_name);

    py::register_exception<Exhausted>(m, "Exhausted");
    py::register_exception<DimensionCollapse>(m, "DimensionCollapse");

#ifdef VERSION_INFO
    m.attr("__version__") = MACRO_STRINGIFY(VERSION_INFO);
#else
    m.attr("__version__") = "dev";
#endif
}
