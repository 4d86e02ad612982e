#include "causeweave/citest.hpp"
#include "causeweave/dataset.hpp"
#include "causeweave/graph.hpp"
#include "causeweave/pcstable.hpp"
#include "causeweave/score.hpp"
#include "causeweave/simgen.hpp"
#include "causeweave/skeleton_orient.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace causeweave;

namespace {

Cpdag run_learn(const std::vector<std::string>& names, const CiBackend& backend, double alpha, int m_ci,
                const std::string& algorithm, int threads, const std::string& prior_json) {
    CICache cache;
    CiTester ci(backend, cache);
    PriorKnowledge prior;
    if (!prior_json.empty())
        prior = parse_prior(prior_json, names);
    py::gil_scoped_release release;
    if (algorithm == "proposed") {
        LearnOptions opt;
        opt.alpha = alpha;
        opt.m_ci = m_ci;
        opt.threads = threads;
        return learn_structure(names, ci, opt, prior).graph;
    }
    if (algorithm == "pc-stable") {
        PcStableOptions opt;
        opt.alpha = alpha;
        opt.m_ci = m_ci;
        opt.threads = threads;
        return pc_stable(names, ci, opt, prior);
    }
    throw Error(ErrorCode::Usage, "unknown algorithm '" + algorithm + "'");
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Constraint-based causal structure learning";

    static PyObject* error_type = nullptr;
    error_type = py::register_exception<Error>(m, "CauseweaveError").ptr();
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p)
                std::rethrow_exception(p);
        } catch (const Error& e) {
            PyErr_SetString(error_type, (std::string(to_string(e.code())) + ": " + e.what()).c_str());
        }
    });

    py::class_<Dataset>(m, "Dataset")
        .def_property_readonly("rows", &Dataset::rows)
        .def_property_readonly("variables", &Dataset::variables)
        .def("names", &Dataset::names)
        .def("to_csv", [](const Dataset& d) { return to_csv(d); })
        .def_static("from_continuous", &Dataset::from_continuous, py::arg("names"), py::arg("columns"));

    m.def("load_csv", [](const std::string& data, const std::string& schema) { return load_csv(data, schema); },
          py::arg("data"), py::arg("schema"));
    m.def("parse_csv",
          [](const std::string& text, const std::string& schema_json) {
              return parse_csv(text, parse_schema(schema_json));
          },
          py::arg("text"), py::arg("schema_json"));

    py::class_<CITestResult>(m, "CITestResult")
        .def_readonly("p_value", &CITestResult::p_value)
        .def_readonly("statistic", &CITestResult::statistic)
        .def_readonly("dof", &CITestResult::dof)
        .def_readonly("low_power", &CITestResult::low_power)
        .def_property_readonly("backend", [](const CITestResult& r) { return std::string(to_string(r.backend)); });

    m.def("ci_test",
          [](const Dataset& d, VarId x, VarId y, const VarSet& s, const std::string& test) {
              return ci_test(d, x, y, sets::make(s), parse_data_test(test));
          },
          py::arg("data"), py::arg("x"), py::arg("y"), py::arg("s") = VarSet{}, py::arg("test") = "auto");

    m.def("d_separated",
          [](std::size_t n, const std::vector<std::pair<VarId, VarId>>& edges, VarId x, VarId y, const VarSet& s) {
              return d_sep(OracleGraph(n, edges), x, y, sets::make(s));
          },
          py::arg("vertices"), py::arg("edges"), py::arg("x"), py::arg("y"), py::arg("s") = VarSet{});

    m.def("learn_json",
          [](const Dataset& d, double alpha, int m_ci, const std::string& algorithm, int threads,
             const std::string& prior_json) {
              DataCiBackend backend(d);
              return to_json(run_learn(d.names(), backend, alpha, m_ci, algorithm, threads, prior_json));
          },
          py::arg("data"), py::arg("alpha") = 0.05, py::arg("m_ci") = 3, py::arg("algorithm") = "proposed",
          py::arg("threads") = 1, py::arg("prior_json") = "");

    m.def("learn_injected_json",
          [](const std::string& injected_json, double alpha, int m_ci, const std::string& algorithm) {
              std::vector<std::string> names;
              auto table = parse_injected(injected_json, names);
              InjectedBackend backend(table, names.size());
              return to_json(run_learn(names, backend, alpha, m_ci, algorithm, 1, ""));
          },
          py::arg("injected_json"), py::arg("alpha") = 0.05, py::arg("m_ci") = 3,
          py::arg("algorithm") = "proposed");

    m.def("learn_oracle_json",
          [](const std::vector<std::string>& names, const std::vector<std::pair<VarId, VarId>>& edges, int m_ci,
             const std::string& algorithm) {
              OracleBackend backend(OracleGraph(names.size(), edges));
              return to_json(run_learn(names, backend, 0.5, m_ci, algorithm, 1, ""));
          },
          py::arg("names"), py::arg("edges"), py::arg("m_ci") = 3, py::arg("algorithm") = "proposed");

    m.def("score_json",
          [](const Dataset& d, const std::string& graph_text) {
              auto first = graph_text.find_first_not_of(" \t\r\n");
              Cpdag g = first != std::string::npos && graph_text[first] == '{' ? cpdag_from_json(graph_text)
                                                                                 : cpdag_from_dot(graph_text);
              return report_to_json(bic_of_graph(d, g));
          },
          py::arg("data"), py::arg("graph"));

    m.def("json_to_dot", [](const std::string& text) { return to_dot(cpdag_from_json(text)); });
    m.def("dot_to_json", [](const std::string& text) { return to_json(cpdag_from_dot(text)); });

    m.def("gen_linear_sem",
          [](int k, double rho, double theta, std::size_t n, std::uint64_t seed) {
              LinearSemSpec spec{k, rho, theta, n, seed};
              SimulatedData sim = gen_linear_sem(spec);
              return py::make_tuple(sim.data, sim.truth.edges());
          },
          py::arg("k"), py::arg("rho"), py::arg("theta"), py::arg("n"), py::arg("seed") = 1);

    m.def("gen_discrete_net",
          [](int k, int max_parents, int levels, std::size_t n, std::uint64_t seed) {
              SimulatedData sim = gen_discrete_net(k, max_parents, levels, n, seed);
              return py::make_tuple(sim.data, sim.truth.edges());
          },
          py::arg("k"), py::arg("max_parents"), py::arg("levels"), py::arg("n"), py::arg("seed") = 1);

    m.def("simulate_json",
          [](const std::string& preset, int k, std::size_t n, int reps, std::uint64_t seed, int threads,
             std::optional<double> alpha, std::optional<int> m_ci, double theta, double rho, bool score) {
              SimConfig cfg =
                  parse_sim_preset(preset) == SimPreset::Continuous ? SimConfig::continuous(theta, rho)
                                                                    : SimConfig::categorical();
              cfg.k = k;
              cfg.n = n;
              cfg.reps = reps;
              cfg.seed = seed;
              cfg.threads = threads;
              cfg.score = score;
              if (alpha)
                  cfg.alpha = *alpha;
              if (m_ci)
                  cfg.m_ci = *m_ci;
              py::gil_scoped_release release;
              return to_json(run_simulation(cfg));
          },
          py::arg("preset") = "categorical", py::arg("k") = 20, py::arg("n") = 500, py::arg("reps") = 100,
          py::arg("seed") = 1, py::arg("threads") = 1, py::arg("alpha") = std::nullopt,
          py::arg("m_ci") = std::nullopt, py::arg("theta") = 0.5, py::arg("rho") = 0.04, py::arg("score") = true);
}
