#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "pmdlab/decomposition.hpp"
#include "pmdlab/errors.hpp"
#include "pmdlab/io.hpp"
#include "pmdlab/lattice.hpp"
#include "pmdlab/learn.hpp"

namespace py = pybind11;
using namespace pmdlab;

namespace {

using Rows = std::vector<std::vector<double>>;

// Points become tuples so they can key a dict.
py::dict as_dict(const SparsePmf& p) {
    py::dict out;
    for (const auto& [x, v] : p.entries()) out[py::tuple(py::cast(x))] = v;
    return out;
}

// Learners see the sample as an empirical distribution and draw from it with replacement.
py::tuple learn_from(const std::vector<Point>& data, int k, double eps, double delta, std::uint64_t seed, bool pmd) {
    if (data.empty()) throw InvalidArgument("learn: no samples");
    LearnConfig cfg;
    cfg.eps = eps;
    cfg.delta = delta;
    cfg.seed = seed;
    auto rng = std::make_shared<Rng>(seed ^ 0x9e3779b97f4a7c15ULL);
    SampleOracle oracle = [rng, &data]() {
        std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
        return data[pick(*rng)];
    };
    LearnResult res;
    {
        py::gil_scoped_release release;
        res = pmd ? learn_pmd(oracle, k, cfg) : learn_siirv(oracle, k, cfg);
    }
    py::object h = res.hypothesis ? py::cast(*res.hypothesis) : py::none();
    return py::make_tuple(h, to_json(res.report));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Native core of pmdlab";

    // Translators run most recent first, so the base class goes first.
    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<SupportCapExceeded>(m, "SupportCapExceeded", PyExc_MemoryError);
    py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);

    py::class_<Hypothesis>(m, "Hypothesis")
        .def_property_readonly("dims", &Hypothesis::dims)
        .def_property_readonly("label", &Hypothesis::label)
        .def_property_readonly("tag", &Hypothesis::tag)
        .def("pmf", &Hypothesis::pmf_at, py::arg("point"))
        .def(
            "sample",
            [](const Hypothesis& h, std::size_t n, std::uint64_t seed) {
                Rng rng(seed);
                std::vector<Point> out(n);
                for (auto& x : out) x = h.sample(rng);
                return out;
            },
            py::arg("n"), py::arg("seed") = 1)
        .def("table", [](const Hypothesis& h) { return as_dict(h.tabulate()); })
        .def("to_json", [](const Hypothesis& h) { return to_json(h); })
        .def_static("from_json", &parse_hypothesis)
        .def("__repr__", [](const Hypothesis& h) { return "<Hypothesis " + h.tag() + " '" + h.label() + "'>"; });

    m.def(
        "pmf", [](const Rows& rows, const Point& x) { return pmd_pmf_exact(ParamMatrix::from_rows(rows)).at(x); },
        py::arg("rows"), py::arg("point"), "Exact probability of a point under the PMD with the given rows.");
    m.def(
        "siirv_pmf",
        [](const Rows& rows, std::int64_t v) { return siirv_pmf_exact(ParamMatrix::from_rows(rows)).at({v}); },
        py::arg("rows"), py::arg("value"));
    m.def(
        "pmd_pmf_table", [](const Rows& rows) { return as_dict(pmd_pmf_exact(ParamMatrix::from_rows(rows))); },
        py::arg("rows"));
    m.def(
        "siirv_pmf_table", [](const Rows& rows) { return as_dict(siirv_pmf_exact(ParamMatrix::from_rows(rows))); },
        py::arg("rows"));
    m.def(
        "tv",
        [](const Rows& a, const Rows& b) {
            return tv_distance(pmd_pmf_exact(ParamMatrix::from_rows(a)), pmd_pmf_exact(ParamMatrix::from_rows(b)));
        },
        py::arg("a"), py::arg("b"), "Exact total variation distance between two PMDs.");
    m.def(
        "decompose_json",
        [](const Rows& rows, double c, double t, double gamma, bool measure) {
            auto pm = ParamMatrix::from_rows(rows);
            DecompositionConfig cfg;
            cfg.c = c;
            cfg.t = t;
            cfg.gamma = gamma;
            cfg.validate(pm.k());
            auto r = decompose(pm, cfg);
            std::optional<double> measured;
            if (measure) measured = tv_distance(pmd_pmf_exact(pm), tabulate_decomposition(r.decomposition));
            return to_json(r, measured);
        },
        py::arg("rows"), py::arg("c"), py::arg("t"), py::arg("gamma"), py::arg("measure"));
    m.def(
        "learn_pmd",
        [](const std::vector<Point>& s, int k, double eps, double delta, std::uint64_t seed) {
            return learn_from(s, k, eps, delta, seed, true);
        },
        py::arg("samples"), py::arg("k"), py::arg("epsilon"), py::arg("delta"), py::arg("seed"));
    m.def(
        "learn_siirv",
        [](const std::vector<Point>& s, int k, double eps, double delta, std::uint64_t seed) {
            return learn_from(s, k, eps, delta, seed, false);
        },
        py::arg("samples"), py::arg("k"), py::arg("epsilon"), py::arg("delta"), py::arg("seed"));
}
