#include "wtlab/construction.hpp"
#include "wtlab/errors.hpp"
#include "wtlab/experiments.hpp"
#include "wtlab/operators.hpp"
#include "wtlab/parallel.hpp"
#include "wtlab/triadic.hpp"
#include "wtlab/young.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace wtlab;

namespace {

StepFunction step_from_strings(const std::vector<std::string>& breakpoints,
                               const std::vector<double>& values) {
    std::vector<Rational3> brk;
    brk.reserve(breakpoints.size());
    for (const auto& s : breakpoints) brk.push_back(Rational3::from_string(s));
    return StepFunction(std::move(brk), values);
}

ExperimentConfig config_from_dict(const py::dict& d) {
    nlohmann::json j;
    for (auto item : d) {
        std::string key = py::str(item.first);
        py::object v = py::reinterpret_borrow<py::object>(item.second);
        if (py::isinstance<py::bool_>(v))
            j[key] = v.cast<bool>();
        else if (py::isinstance<py::int_>(v))
            j[key] = v.cast<long long>();
        else if (py::isinstance<py::float_>(v))
            j[key] = v.cast<double>();
        else if (py::isinstance<py::str>(v))
            j[key] = v.cast<std::string>();
        else if (py::isinstance<py::list>(v) || py::isinstance<py::tuple>(v)) {
            auto seq = v.cast<py::sequence>();
            nlohmann::json arr = nlohmann::json::array();
            for (auto e : seq) {
                py::object o = py::reinterpret_borrow<py::object>(e);
                if (py::isinstance<py::int_>(o))
                    arr.push_back(o.cast<long long>());
                else if (py::isinstance<py::float_>(o))
                    arr.push_back(o.cast<double>());
                else
                    arr.push_back(o.cast<std::string>());
            }
            j[key] = std::move(arr);
        } else {
            throw ParamError("unsupported config value for key '" + key + "'");
        }
    }
    return ExperimentConfig::from_json(j);
}

py::object json_to_py(const nlohmann::ordered_json& j) {
    py::module_ pyjson = py::module_::import("json");
    return pyjson.attr("loads")(j.dump());
}

py::object run_dict(const py::dict& d, int threads) {
    ExperimentConfig cfg = config_from_dict(d);
    ExperimentReport rep = run_experiment(cfg, threads > 0 ? threads : default_thread_count());
    nlohmann::ordered_json env;
    env["format"] = "wtlab-report-v1";
    env["payload"] = rep.payload;
    env["meta"] =
        nlohmann::ordered_json{{"duration_ms", rep.duration_ms}, {"threads", rep.threads_used}};
    return json_to_py(env);
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "triadic counterexample weights, Hilbert transforms and Orlicz maximal operators";

    py::register_exception<ParamError>(m, "ParamError", PyExc_ValueError);
    py::register_exception<CapacityError>(m, "CapacityError", PyExc_RuntimeError);
    py::register_exception<TailRefusal>(m, "TailRefusal", PyExc_RuntimeError);
    py::register_exception<SingularityError>(m, "SingularityError", PyExc_ValueError);

    py::class_<Rational3>(m, "Rational3")
        .def(py::init([](const std::string& s) { return Rational3::from_string(s); }))
        .def(py::init([](long long n) { return Rational3(n); }))
        .def_static("parse", &Rational3::parse)
        .def("__str__", &Rational3::to_string)
        .def("__repr__", [](const Rational3& r) { return "Rational3('" + r.to_string() + "')"; })
        .def("__float__", &Rational3::to_double)
        .def("__add__", &Rational3::operator+)
        .def("__sub__", [](const Rational3& a, const Rational3& b) { return a - b; })
        .def("__mul__", &Rational3::operator*)
        .def("__eq__", [](const Rational3& a, const Rational3& b) { return a == b; })
        .def("__lt__", [](const Rational3& a, const Rational3& b) { return a < b; })
        .def("__le__", [](const Rational3& a, const Rational3& b) { return a <= b; })
        .def_property_readonly("scale", &Rational3::scale)
        .def_property_readonly("num", &Rational3::num_string);

    py::enum_<Side>(m, "Side").value("LEFT", Side::Left).value("RIGHT", Side::Right);

    py::class_<TriadicInterval>(m, "TriadicInterval")
        .def(py::init([](uint32_t level, long long index) {
            return TriadicInterval(level, BigInt(index));
        }))
        .def_property_readonly("level", &TriadicInterval::level)
        .def_property_readonly("index",
                               [](const TriadicInterval& t) { return t.index().str(); })
        .def("left", &TriadicInterval::left)
        .def("right", &TriadicInterval::right)
        .def("length", &TriadicInterval::length)
        .def("children", &TriadicInterval::children)
        .def("middle_third", &TriadicInterval::middle_third)
        .def("adjacent_scaled", &TriadicInterval::adjacent_scaled, py::arg("side"),
             py::arg("k"))
        .def("__repr__", [](const TriadicInterval& t) { return t.to_string(); });

    py::class_<StepFunction>(m, "StepFunction")
        .def(py::init(&step_from_strings), py::arg("breakpoints"), py::arg("values"))
        .def_static("from_json", &StepFunction::from_json)
        .def("to_json", &StepFunction::to_json)
        .def("evaluate", [](const StepFunction& f, double x) { return f.evaluate(x); })
        .def("integrate",
             [](const StepFunction& f, double a, double b, double power) {
                 return f.integrate(a, b, power);
             },
             py::arg("a"), py::arg("b"), py::arg("power") = 1.0)
        .def("mass", &StepFunction::mass)
        .def("scaled", &StepFunction::scaled)
        .def_property_readonly("piece_count", &StepFunction::piece_count)
        .def_property_readonly("nonzero_piece_count", &StepFunction::nonzero_piece_count)
        .def_property_readonly("values", &StepFunction::values)
        .def_property_readonly(
            "breakpoints", [](const StepFunction& f) {
                std::vector<std::string> out;
                for (const auto& b : f.breakpoints()) out.push_back(b.to_string());
                return out;
            });

    py::class_<YoungFunction>(m, "YoungFunction")
        .def_static("from_spec", &YoungFunction::from_spec)
        .def("value", &YoungFunction::value)
        .def("inverse", &YoungFunction::inverse)
        .def("spec", &YoungFunction::spec)
        .def("__repr__",
             [](const YoungFunction& p) { return "YoungFunction('" + p.spec() + "')"; });

    m.def(
        "build_weight",
        [](uint32_t k, uint32_t depth, const std::string& orientation, const std::string& sides,
           int64_t piece_budget) {
            ConstructionParams params;
            params.k = k;
            params.depth = depth;
            params.policy = orientation_from_string(orientation);
            params.piece_budget = piece_budget;
            if (params.policy == OrientationPolicy::Explicit)
                for (char c : sides)
                    params.explicit_sides.push_back(c == 'R' ? Side::Right : Side::Left);
            GenerationTree tree = build_generations(params);
            auto res = build_weight(tree, k);
            return py::make_tuple(res.weight, res.tail_mass, tree.to_json());
        },
        py::arg("k"), py::arg("depth"), py::arg("orientation") = "all_left",
        py::arg("sides") = "", py::arg("piece_budget") = int64_t(2'000'000),
        "returns (weight, tail_mass, tree_json)");

    m.def("truncation_tail", &truncation_tail, py::arg("k"), py::arg("depth"));
    m.def("exact_total_mass", [](uint32_t k, uint32_t L) {
        auto q = exact_total_mass(k, L);
        return boost::multiprecision::numerator(q).str() + "/" +
               boost::multiprecision::denominator(q).str();
    });
    m.def("hilbert", &hilbert_step, py::arg("f"), py::arg("x"),
          "p.v. integral of f(t)/(x-t) dt, no 1/pi factor");
    m.def(
        "maximal",
        [](const StepFunction& f, double x, double r) { return maximal(f, x, r); },
        py::arg("f"), py::arg("x"), py::arg("r") = 1.0);
    m.def(
        "orlicz_maximal",
        [](const StepFunction& f, double x, const std::string& phi, bool force_general) {
            return orlicz_maximal(f, x, YoungFunction::from_spec(phi), force_general);
        },
        py::arg("f"), py::arg("x"), py::arg("phi"), py::arg("force_general") = false);
    m.def(
        "luxemburg_norm",
        [](const StepFunction& f, double a, double b, const std::string& phi) {
            return luxemburg_norm(f, a, b, YoungFunction::from_spec(phi));
        },
        py::arg("f"), py::arg("a"), py::arg("b"), py::arg("phi"));
    m.def(
        "mphi_mr_bound_constant",
        [](const std::string& phi, double r) {
            return mphi_mr_bound_constant(YoungFunction::from_spec(phi), r);
        },
        py::arg("phi"), py::arg("r"));
    m.def(
        "growth_factor",
        [](const std::string& phi, double r) {
            return growth_factor(YoungFunction::from_spec(phi), r);
        },
        py::arg("phi"), py::arg("r"));
    m.def("r_k", &r_k, py::arg("k"));
    m.def("superlevel_weight", &superlevel_weight, py::arg("f"), py::arg("w"),
          py::arg("lambda_"), py::arg("resolution") = 8, py::arg("threads") = 1);
    m.def(
        "orientation_search",
        [](uint32_t k, uint32_t depth, int64_t sample_budget, int64_t piece_budget,
           int threads) {
            auto res = orientation_search(k, depth, sample_budget, piece_budget, threads);
            std::string sides;
            for (Side s : res.sides) sides.push_back(s == Side::Left ? 'L' : 'R');
            return py::make_tuple(sides, res.score, res.policy_used);
        },
        py::arg("k"), py::arg("depth"), py::arg("sample_budget") = int64_t(100'000),
        py::arg("piece_budget") = int64_t(2'000'000), py::arg("threads") = 1);
    m.def("run_experiment", &run_dict, py::arg("config"), py::arg("threads") = 0,
          "run a config dict (same schema as the CLI wtlab-config-v1) and return the report");
    m.def("hilbert_convention", []() { return std::string(kHilbertConvention); });
}
