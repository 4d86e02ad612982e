#include "causeweave/cli.hpp"

#include "causeweave/citest.hpp"
#include "causeweave/dataset.hpp"
#include "causeweave/graph.hpp"
#include "causeweave/pcstable.hpp"
#include "causeweave/score.hpp"
#include "causeweave/simgen.hpp"
#include "causeweave/skeleton_orient.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <thread>

namespace causeweave {

int resolve_threads(int flag_value) {
    if (flag_value > 0)
        return flag_value;
    if (const char* env = std::getenv("CAUSEWEAVE_THREADS")) {
        try {
            int v = std::stoi(env);
            if (v > 0)
                return v;
        } catch (const std::exception&) {
        }
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

namespace {

struct Common {
    int threads = 0;
    std::string out;
    std::string format;
};

struct LearnArgs {
    std::string data, schema, injected, truth, prior;
    double alpha = 0.05;
    int m_ci = 3;
    std::string algorithm = "proposed";
    std::string backend = "auto";
    std::size_t budget = 1'000'000;
    bool preprocess = false;
};

struct SimulateArgs {
    std::string preset = "categorical";
    int k = 20;
    std::size_t n = 500;
    int reps = 100;
    double rho = 0.04;
    double theta = 0.5;
    int max_parents = 3;
    int levels = 3;
    std::optional<double> alpha;
    std::optional<int> m_ci;
    std::string algorithm = "all";
    std::uint64_t seed = 1;
    bool no_score = false;
};

struct ScoreArgs {
    std::string data, schema;
    std::vector<std::string> graphs;
};

struct ExportArgs {
    std::string graph;
    std::string vertex;
    int max_distance = 3;
};

void emit(const Common& c, const std::string& text, std::ostream& out) {
    if (c.out.empty() || c.out == "-") {
        out << text;
        if (!text.empty() && text.back() != '\n')
            out << '\n';
        return;
    }
    std::ofstream f(c.out, std::ios::binary);
    if (!f)
        throw Error(ErrorCode::Io, "cannot write '" + c.out + "'");
    f << text;
    if (!text.empty() && text.back() != '\n')
        f << '\n';
}

int exit_code(ErrorCode code) {
    switch (code) {
    case ErrorCode::BudgetExceeded:
    case ErrorCode::EmptyFamily:
    case ErrorCode::UninjectedQuery:
    case ErrorCode::PreconditionViolation:
        return 1;
    default:
        return 2;
    }
}

void error_json(std::ostream& err, std::string_view code, const std::string& message) {
    nlohmann::ordered_json j;
    j["error"] = {{"code", std::string(code)}, {"message", message}};
    err << j.dump() << '\n';
}

PriorKnowledge merge(PriorKnowledge a, const PriorKnowledge& b) {
    for (const auto& [v, t] : b.tiers)
        a.tiers[v] = t;
    a.forbidden.insert(b.forbidden.begin(), b.forbidden.end());
    a.required.insert(b.required.begin(), b.required.end());
    return a;
}

std::string summary_line(const Cpdag& g) {
    std::ostringstream s;
    s << "NV=" << g.vertices() << " NE=" << g.edge_count() << " NDE=" << g.directed_count();
    return s.str();
}

int cmd_learn(const LearnArgs& a, const Common& c, std::ostream& out, std::ostream& err) {
    const int threads = resolve_threads(c.threads);
    std::vector<std::string> names;
    std::optional<Dataset> data;
    std::unique_ptr<CiBackend> backend;
    PriorKnowledge prior;

    if (a.backend == "injected") {
        if (a.injected.empty())
            throw Error(ErrorCode::Usage, "--backend injected needs --injected FILE");
        if (!a.schema.empty())
            for (const auto& v : load_schema(a.schema))
                names.push_back(v.name);
        auto table = load_injected(a.injected, names);
        backend = std::make_unique<InjectedBackend>(table, names.size());
    } else if (a.backend == "oracle") {
        if (a.truth.empty())
            throw Error(ErrorCode::Usage, "--backend oracle needs --truth GRAPH");
        Cpdag truth = load_graph(a.truth);
        if (!truth.undirected_edges().empty())
            throw Error(ErrorCode::Usage, "--truth must be fully directed");
        names = truth.names();
        backend = std::make_unique<OracleBackend>(OracleGraph(truth.vertices(), truth.directed_edges()));
    } else {
        if (a.data.empty() || a.schema.empty())
            throw Error(ErrorCode::Usage, "learning from data needs --data and --schema");
        data = load_csv(a.data, a.schema);
        if (a.preprocess)
            data = cap_levels(filter_dominant(*data));
        names = data->names();
        std::vector<std::optional<int>> tiers;
        for (const auto& v : data->schema())
            tiers.push_back(v.tier);
        prior = prior_from_tiers(tiers);
        backend = std::make_unique<DataCiBackend>(*data, parse_data_test(a.backend));
    }
    if (!a.prior.empty())
        prior = merge(prior, load_prior(a.prior, names));

    CICache cache;
    CiTester ci(*backend, cache);
    Cpdag g;
    std::vector<std::string> log;
    if (a.algorithm == "proposed") {
        LearnOptions opt;
        opt.alpha = a.alpha;
        opt.m_ci = a.m_ci;
        opt.budget = a.budget;
        opt.threads = threads;
        LearnResult r = learn_structure(names, ci, opt, prior);
        g = std::move(r.graph);
        log = std::move(r.log);
    } else {
        PcStableOptions opt;
        opt.alpha = a.alpha;
        opt.m_ci = a.m_ci;
        opt.threads = threads;
        g = pc_stable(names, ci, opt, prior, &log);
    }

    for (const auto& line : log)
        err << line << '\n';
    const std::string format = c.format.empty() ? "json" : c.format;
    if (format == "csv")
        throw Error(ErrorCode::Usage, "learn writes json or dot");
    emit(c, format == "dot" ? to_dot(g) : to_json(g), out);
    (c.out.empty() || c.out == "-" ? err : out) << summary_line(g) << '\n';
    return 0;
}

int cmd_simulate(const SimulateArgs& a, const Common& c, std::ostream& out) {
    SimConfig cfg = parse_sim_preset(a.preset) == SimPreset::Continuous ? SimConfig::continuous(a.theta, a.rho)
                                                                         : SimConfig::categorical();
    cfg.k = a.k;
    cfg.n = a.n;
    cfg.reps = a.reps;
    cfg.max_parents = a.max_parents;
    cfg.levels = a.levels;
    if (a.alpha)
        cfg.alpha = *a.alpha;
    if (a.m_ci)
        cfg.m_ci = *a.m_ci;
    if (a.algorithm != "all")
        cfg.algorithms = {a.algorithm};
    cfg.score = !a.no_score;
    cfg.seed = a.seed;
    cfg.threads = resolve_threads(c.threads);

    SimulationResult result = run_simulation(cfg);
    if (c.format == "dot")
        throw Error(ErrorCode::Usage, "simulate writes json or csv");
    emit(c, c.format == "csv" ? roc_csv(result) : to_json(result), out);
    return 0;
}

int cmd_score(const ScoreArgs& a, const Common& c, std::ostream& out) {
    Dataset data = load_csv(a.data, a.schema);
    const int threads = resolve_threads(c.threads);
    std::vector<std::pair<std::string, FitReport>> rows;
    for (const auto& path : a.graphs) {
        Cpdag g = load_graph(path);
        if (g.names() != data.names()) {
            // same vertex set in another order is accepted and reindexed
            std::vector<std::string> sorted_g = g.names(), sorted_d = data.names();
            std::sort(sorted_g.begin(), sorted_g.end());
            std::sort(sorted_d.begin(), sorted_d.end());
            if (sorted_g != sorted_d)
                throw Error(ErrorCode::VertexMismatch, "graph '" + path + "' does not match the dataset variables");
            Cpdag re(data.names());
            for (auto [x, y] : g.directed_edges())
                re.add_directed(data.id_of(g.names()[static_cast<std::size_t>(x)]),
                                data.id_of(g.names()[static_cast<std::size_t>(y)]));
            for (auto [x, y] : g.undirected_edges())
                re.add_undirected(data.id_of(g.names()[static_cast<std::size_t>(x)]),
                                  data.id_of(g.names()[static_cast<std::size_t>(y)]));
            g = std::move(re);
        }
        rows.emplace_back(path, bic_of_graph(data, g, threads));
    }

    std::string text;
    if (c.format == "json") {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& [label, r] : rows) {
            nlohmann::ordered_json o;
            o["graph"] = label;
            o["report"] = nlohmann::ordered_json::parse(report_to_json(r));
            arr.push_back(std::move(o));
        }
        text = arr.dump(2);
    } else if (c.format == "csv") {
        std::ostringstream s;
        s.precision(17);
        s << "graph,df,loglik_star,bic\n";
        for (const auto& [label, r] : rows)
            s << label << ',' << r.df << ',' << r.loglik_star << ',' << r.bic << '\n';
        text = s.str();
    } else if (c.format.empty()) {
        text = bic_table(rows);
    } else {
        throw Error(ErrorCode::Usage, "score writes a table, json or csv");
    }
    emit(c, text, out);
    return 0;
}

int cmd_export(const ExportArgs& a, const Common& c, std::ostream& out) {
    Cpdag g = load_graph(a.graph);
    if (!a.vertex.empty()) {
        VarId v = g.id_of(a.vertex);
        std::vector<int> dist = distances_from(g, v);
        std::vector<int> counts(static_cast<std::size_t>(a.max_distance) + 1, 0);
        for (std::size_t u = 0; u < dist.size(); ++u)
            if (static_cast<VarId>(u) != v && dist[u] > 0)
                for (int k = dist[u]; k <= a.max_distance; ++k)
                    ++counts[static_cast<std::size_t>(k)];
        std::string text;
        if (c.format == "csv") {
            std::ostringstream s;
            s << "k,count\n";
            for (int k = 1; k <= a.max_distance; ++k)
                s << k << ',' << counts[static_cast<std::size_t>(k)] << '\n';
            text = s.str();
        } else {
            nlohmann::ordered_json j;
            j["vertex"] = a.vertex;
            auto arr = nlohmann::ordered_json::array();
            for (int k = 1; k <= a.max_distance; ++k)
                arr.push_back({{"k", k}, {"count", counts[static_cast<std::size_t>(k)]}});
            j["within"] = std::move(arr);
            text = j.dump(2);
        }
        emit(c, text, out);
        return 0;
    }
    if (c.format == "csv")
        throw Error(ErrorCode::Usage, "graphs export to json or dot");
    emit(c, c.format == "dot" ? to_dot(g) : to_json(g), out);
    return 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Constraint-based causal structure learning", "causeweave"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "causeweave 0.1.0");

    Common common;
    auto add_common = [&](CLI::App* sub, std::vector<std::string> formats) {
        sub->add_option("--threads", common.threads, "Worker threads (default: CAUSEWEAVE_THREADS or all cores)")
            ->check(CLI::PositiveNumber);
        sub->add_option("--out", common.out, "Output file (default: stdout)");
        sub->add_option("--format", common.format, "Output format")->check(CLI::IsMember(formats));
    };

    LearnArgs learn;
    auto* l = app.add_subcommand("learn", "Learn a CPDAG from data or a CI backend");
    l->add_option("--data", learn.data, "CSV file");
    l->add_option("--schema", learn.schema, "Schema JSON");
    l->add_option("--alpha", learn.alpha, "Significance level")->check(CLI::Range(0.0, 1.0));
    l->add_option("--m-ci", learn.m_ci, "Largest conditioning set")->check(CLI::NonNegativeNumber);
    l->add_option("--algorithm", learn.algorithm)->check(CLI::IsMember({"proposed", "pc-stable"}));
    l->add_option("--backend", learn.backend)
        ->check(CLI::IsMember({"auto", "gtest", "fisherz", "injected", "oracle"}));
    l->add_option("--injected", learn.injected, "JSON array of {x, y, s, p}");
    l->add_option("--truth", learn.truth, "True DAG for the oracle backend");
    l->add_option("--prior", learn.prior, "Prior knowledge JSON");
    l->add_option("--budget", learn.budget, "Largest number of expanded sets per target");
    l->add_flag("--preprocess", learn.preprocess, "Drop near-constant variables and fold rare levels");
    add_common(l, {"json", "dot"});

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "Run a simulation study");
    s->add_option("--preset", sim.preset)->check(CLI::IsMember({"continuous", "categorical"}));
    s->add_option("--k", sim.k, "Vertices")->check(CLI::Range(2, 100000));
    s->add_option("--n", sim.n, "Rows per data set")->check(CLI::PositiveNumber);
    s->add_option("--reps", sim.reps)->check(CLI::PositiveNumber);
    s->add_option("--rho", sim.rho, "Edge probability (continuous)")->check(CLI::Range(0.0, 1.0));
    s->add_option("--theta", sim.theta, "Signal strength (continuous)");
    s->add_option("--max-parents", sim.max_parents, "Parent cap (categorical)")->check(CLI::NonNegativeNumber);
    s->add_option("--levels", sim.levels, "Largest level count (categorical)")->check(CLI::Range(2, 1000));
    s->add_option("--alpha", sim.alpha)->check(CLI::Range(0.0, 1.0));
    s->add_option("--m-ci", sim.m_ci)->check(CLI::NonNegativeNumber);
    s->add_option("--algorithm", sim.algorithm)->check(CLI::IsMember({"all", "proposed", "pc-stable"}));
    s->add_option("--seed", sim.seed);
    s->add_flag("--no-score", sim.no_score, "Skip BIC scoring");
    add_common(s, {"json", "csv"});

    ScoreArgs score;
    auto* sc = app.add_subcommand("score", "BIC comparison of graphs against a dataset");
    sc->add_option("--data", score.data)->required();
    sc->add_option("--schema", score.schema)->required();
    sc->add_option("--graph", score.graphs, "Graph file (JSON or DOT), repeatable")->required();
    add_common(sc, {"json", "csv"});

    ExportArgs exp;
    auto* ex = app.add_subcommand("export", "Convert graphs, report neighbourhood distances");
    ex->add_option("--graph", exp.graph, "Graph file (JSON or DOT)")->required();
    ex->add_option("--vertex", exp.vertex, "Report N(d <= k) around this vertex");
    ex->add_option("--max-distance", exp.max_distance)->check(CLI::PositiveNumber);
    add_common(ex, {"json", "dot", "csv"});

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForVersion& e) {
        out << e.what() << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        error_json(err, "Usage", e.what());
        return 2;
    }

    try {
        if (l->parsed())
            return cmd_learn(learn, common, out, err);
        if (s->parsed())
            return cmd_simulate(sim, common, out);
        if (sc->parsed())
            return cmd_score(score, common, out);
        return cmd_export(exp, common, out);
    } catch (const Error& e) {
        error_json(err, to_string(e.code()), e.what());
        return exit_code(e.code());
    } catch (const std::bad_alloc&) {
        error_json(err, "OutOfMemory", "allocation failed");
        return 1;
    } catch (const std::exception& e) {
        error_json(err, "Internal", e.what());
        return 1;
    }
}

} // namespace causeweave
