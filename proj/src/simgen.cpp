#include "causeweave/simgen.hpp"

#include "causeweave/parallel.hpp"
#include "causeweave/pcstable.hpp"
#include "causeweave/score.hpp"
#include "causeweave/skeleton_orient.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace causeweave {

std::mt19937_64 rep_rng(std::uint64_t master, std::uint64_t rep) {
    std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                      static_cast<std::uint32_t>(rep), static_cast<std::uint32_t>(rep >> 32)};
    return std::mt19937_64(seq);
}

void LinearSemSpec::validate() const {
    require(rho > 0.0 && rho < 1.0, "rho must lie in (0, 1)");
    require(n >= 1, "n must be at least 1");
    require(k >= 2, "k must be at least 2");
}

namespace {

std::vector<VarId> random_permutation(int k, std::mt19937_64& rng) {
    std::vector<VarId> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    return perm;
}

std::vector<std::string> numbered(const char* prefix, int k) {
    std::vector<std::string> out;
    for (int i = 1; i <= k; ++i)
        out.push_back(prefix + std::to_string(i));
    return out;
}

} // namespace

SimulatedData gen_linear_sem(const LinearSemSpec& spec, std::mt19937_64& rng) {
    spec.validate();
    const auto k = static_cast<std::size_t>(spec.k);
    std::bernoulli_distribution edge(spec.rho);
    std::normal_distribution<double> normal(0.0, 1.0);

    // weights[i][j] for i < j in generation order; zero when there is no edge
    std::vector<std::vector<double>> weight(k, std::vector<double>(k, 0.0));
    std::vector<std::pair<VarId, VarId>> edges;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j) {
            bool present = edge(rng);
            double s = normal(rng);
            if (present) {
                weight[i][j] = s;
                edges.emplace_back(static_cast<VarId>(i), static_cast<VarId>(j));
            }
        }

    std::vector<std::vector<double>> x(k, std::vector<double>(spec.n));
    for (std::size_t r = 0; r < spec.n; ++r)
        for (std::size_t j = 0; j < k; ++j) {
            double signal = 0.0;
            for (std::size_t i = 0; i < j; ++i)
                if (weight[i][j] != 0.0)
                    signal += x[i][r] * weight[i][j];
            x[j][r] = spec.theta * signal + normal(rng);
        }

    std::vector<VarId> perm = random_permutation(spec.k, rng);
    std::vector<std::vector<double>> columns(k);
    for (std::size_t j = 0; j < k; ++j)
        columns[static_cast<std::size_t>(perm[j])] = std::move(x[j]);

    SimulatedData out;
    out.data = Dataset::from_continuous(numbered("X", spec.k), std::move(columns));
    out.truth = OracleGraph(k, edges).permuted(perm);
    return out;
}

SimulatedData gen_linear_sem(const LinearSemSpec& spec) {
    std::mt19937_64 rng = rep_rng(spec.seed, 0);
    return gen_linear_sem(spec, rng);
}

std::size_t DiscreteNet::config_index(VarId v, const std::vector<int>& assignment) const {
    std::size_t index = 0;
    std::size_t stride = 1;
    for (VarId p : dag.parents(v)) {
        index += stride * static_cast<std::size_t>(assignment[static_cast<std::size_t>(p)]);
        stride *= static_cast<std::size_t>(levels[static_cast<std::size_t>(p)]);
    }
    return index;
}

double DiscreteNet::joint_probability(const std::vector<int>& assignment) const {
    double prob = 1.0;
    for (std::size_t v = 0; v < levels.size(); ++v)
        prob *= cpt[v][config_index(static_cast<VarId>(v), assignment)][static_cast<std::size_t>(assignment[v])];
    return prob;
}

DiscreteNet random_discrete_net(int k, int max_parents, int levels, std::mt19937_64& rng) {
    require(k >= 1, "k must be at least 1");
    require(levels >= 2, "levels must be at least 2");
    require(max_parents >= 0, "max_parents must be non-negative");

    std::vector<VarId> order = random_permutation(k, rng);
    std::vector<std::pair<VarId, VarId>> edges;
    for (int j = 1; j < k; ++j) {
        std::uniform_int_distribution<int> count(0, std::min(max_parents, j));
        int m = count(rng);
        std::vector<VarId> earlier(order.begin(), order.begin() + j);
        std::shuffle(earlier.begin(), earlier.end(), rng);
        for (int i = 0; i < m; ++i)
            edges.emplace_back(earlier[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }

    DiscreteNet net;
    net.dag = OracleGraph(static_cast<std::size_t>(k), edges);
    std::uniform_int_distribution<int> level_count(2, levels);
    net.levels.resize(static_cast<std::size_t>(k));
    for (auto& l : net.levels)
        l = level_count(rng);

    std::exponential_distribution<double> gamma1(1.0); // Gamma(1) draws give a Dirichlet(1) row
    net.cpt.resize(static_cast<std::size_t>(k));
    for (VarId v = 0; v < k; ++v) {
        std::size_t configs = 1;
        for (VarId p : net.dag.parents(v))
            configs *= static_cast<std::size_t>(net.levels[static_cast<std::size_t>(p)]);
        auto& table = net.cpt[static_cast<std::size_t>(v)];
        table.assign(configs, std::vector<double>(static_cast<std::size_t>(net.levels[static_cast<std::size_t>(v)])));
        for (auto& row : table) {
            double sum = 0.0;
            for (auto& w : row) {
                w = gamma1(rng);
                sum += w;
            }
            for (auto& w : row)
                w /= sum;
        }
    }
    return net;
}

Dataset sample_discrete_net(const DiscreteNet& net, std::size_t n, std::mt19937_64& rng) {
    const std::size_t k = net.levels.size();
    std::vector<std::vector<int>> columns(k, std::vector<int>(n));
    std::vector<int> row(k);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t r = 0; r < n; ++r) {
        for (VarId v : net.dag.topological_order()) {
            const auto& dist = net.cpt[static_cast<std::size_t>(v)][net.config_index(v, row)];
            double u = unit(rng);
            int level = static_cast<int>(dist.size()) - 1;
            double acc = 0.0;
            for (std::size_t l = 0; l < dist.size(); ++l) {
                acc += dist[l];
                if (u < acc) {
                    level = static_cast<int>(l);
                    break;
                }
            }
            row[static_cast<std::size_t>(v)] = level;
            columns[static_cast<std::size_t>(v)][r] = level;
        }
    }
    std::vector<VariableSchema> schema(k);
    for (std::size_t v = 0; v < k; ++v) {
        schema[v].name = "V" + std::to_string(v + 1);
        schema[v].kind = VariableKind::Categorical;
        for (int l = 0; l < net.levels[v]; ++l)
            schema[v].levels.push_back(std::to_string(l));
    }
    return Dataset::from_discrete(std::move(schema), std::move(columns));
}

SimulatedData gen_discrete_net(int k, int max_parents, int levels, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng = rep_rng(seed, 0);
    DiscreteNet net = random_discrete_net(k, max_parents, levels, rng);
    SimulatedData out;
    out.data = sample_discrete_net(net, n, rng);
    out.truth = net.dag;
    return out;
}

// ---------------------------------------------------------------------------
// recovery metrics

namespace {

struct Rates {
    double tpr = 1.0;
    double tnr = 1.0;
};

Rates rates(const OracleGraph& truth, const Cpdag& learned) {
    if (learned.vertices() != truth.vertices())
        throw Error(ErrorCode::VertexMismatch, "learned graph and truth have different vertex counts");
    const auto p = static_cast<VarId>(truth.vertices());
    std::size_t pos = 0, neg = 0, tp = 0, tn = 0;
    for (VarId a = 0; a < p; ++a)
        for (VarId b = a + 1; b < p; ++b) {
            bool t = truth.adjacent(a, b);
            bool l = learned.adjacent(a, b);
            if (t) {
                ++pos;
                tp += l;
            } else {
                ++neg;
                tn += !l;
            }
        }
    Rates r;
    if (pos > 0)
        r.tpr = static_cast<double>(tp) / static_cast<double>(pos);
    if (neg > 0)
        r.tnr = static_cast<double>(tn) / static_cast<double>(neg);
    return r;
}

double mean(const std::vector<double>& v) {
    if (v.empty())
        return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

} // namespace

SimReport evaluate_recovery(const std::vector<OracleGraph>& truths, const std::vector<Cpdag>& learned) {
    require(truths.size() == learned.size(), "evaluate_recovery needs one truth per learned graph");
    SimReport report;
    report.reps = static_cast<int>(learned.size());
    for (std::size_t i = 0; i < learned.size(); ++i) {
        Rates r = rates(truths[i], learned[i]);
        report.tpr_per_rep.push_back(r.tpr);
        report.tnr_per_rep.push_back(r.tnr);
    }
    report.tpr = mean(report.tpr_per_rep);
    report.tnr = mean(report.tnr_per_rep);
    report.auc = std::numeric_limits<double>::quiet_NaN();
    return report;
}

SimReport evaluate_recovery(const OracleGraph& truth, const std::vector<Cpdag>& learned) {
    SimReport report = evaluate_recovery(std::vector<OracleGraph>(learned.size(), truth), learned);
    const std::size_t p = truth.vertices();
    report.edge_freq.assign(p, std::vector<double>(p, 0.0));
    if (!learned.empty()) {
        for (const auto& g : learned)
            for (auto [a, b] : g.skeleton()) {
                report.edge_freq[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] += 1.0;
                report.edge_freq[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] += 1.0;
            }
        for (auto& row : report.edge_freq)
            for (auto& f : row)
                f /= static_cast<double>(learned.size());
    }
    report.roc = edge_roc(truth, report.edge_freq);
    report.auc = trapezoid_auc(report.roc);
    return report;
}

std::vector<std::pair<double, double>> edge_roc(const OracleGraph& truth,
                                                const std::vector<std::vector<double>>& edge_freq) {
    const auto p = static_cast<VarId>(truth.vertices());
    require(edge_freq.size() == truth.vertices(), "edge_freq must be a vertices x vertices matrix");
    struct Pair {
        double freq;
        bool edge;
    };
    std::vector<Pair> pairs;
    std::size_t pos = 0, neg = 0;
    for (VarId a = 0; a < p; ++a)
        for (VarId b = a + 1; b < p; ++b) {
            bool t = truth.adjacent(a, b);
            pairs.push_back({edge_freq[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)], t});
            (t ? pos : neg) += 1;
        }

    std::vector<double> cutoffs{std::numeric_limits<double>::infinity()};
    for (const auto& pr : pairs)
        cutoffs.push_back(pr.freq);
    cutoffs.push_back(0.0);
    std::sort(cutoffs.begin(), cutoffs.end(), std::greater<>());
    cutoffs.erase(std::unique(cutoffs.begin(), cutoffs.end()), cutoffs.end());

    std::vector<std::pair<double, double>> points;
    for (double lambda : cutoffs) {
        std::size_t tp = 0, fp = 0;
        for (const auto& pr : pairs)
            if (pr.freq >= lambda)
                (pr.edge ? tp : fp) += 1;
        double tpr = pos > 0 ? static_cast<double>(tp) / static_cast<double>(pos) : 1.0;
        double fpr = neg > 0 ? static_cast<double>(fp) / static_cast<double>(neg) : 0.0;
        if (pos == 0 && tp == 0 && fp == 0)
            tpr = 0.0; // nothing kept at this cutoff
        points.emplace_back(fpr, tpr);
    }
    std::sort(points.begin(), points.end());
    std::vector<std::pair<double, double>> collapsed;
    for (const auto& pt : points) {
        if (!collapsed.empty() && collapsed.back().first == pt.first)
            collapsed.back().second = std::max(collapsed.back().second, pt.second);
        else
            collapsed.push_back(pt);
    }
    return collapsed;
}

double trapezoid_auc(const std::vector<std::pair<double, double>>& roc) {
    if (roc.empty())
        return std::numeric_limits<double>::quiet_NaN();
    double area = 0.0;
    for (std::size_t i = 1; i < roc.size(); ++i)
        area += (roc[i].first - roc[i - 1].first) * (roc[i].second + roc[i - 1].second) / 2.0;
    return area;
}

// ---------------------------------------------------------------------------
// simulation runs

std::string_view to_string(SimPreset p) { return p == SimPreset::Continuous ? "continuous" : "categorical"; }

SimPreset parse_sim_preset(std::string_view s) {
    if (s == "continuous")
        return SimPreset::Continuous;
    if (s == "categorical")
        return SimPreset::Categorical;
    throw Error(ErrorCode::Usage, "unknown simulation preset '" + std::string(s) + "'");
}

SimConfig SimConfig::continuous(double theta, double rho) {
    SimConfig c;
    c.preset = SimPreset::Continuous;
    c.theta = theta;
    c.rho = rho;
    c.alpha = 0.01;
    c.m_ci = 2;
    return c;
}

SimConfig SimConfig::categorical() { return SimConfig{}; }

double median(std::vector<double> values) {
    if (values.empty())
        return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const std::size_t m = values.size() / 2;
    return values.size() % 2 ? values[m] : (values[m - 1] + values[m]) / 2.0;
}

namespace {

Cpdag learn_with(const std::string& algorithm, const Dataset& data, const SimConfig& config) {
    DataCiBackend backend(data, DataTest::Auto);
    CICache cache;
    CiTester ci(backend, cache);
    const auto names = data.names();
    if (algorithm == "proposed") {
        LearnOptions opt;
        opt.alpha = config.alpha;
        opt.m_ci = config.m_ci;
        opt.budget = config.budget;
        return learn_structure(names, ci, opt).graph;
    }
    if (algorithm == "pc-stable") {
        PcStableOptions opt;
        opt.alpha = config.alpha;
        opt.m_ci = config.m_ci;
        return pc_stable(names, ci, opt);
    }
    throw Error(ErrorCode::Usage, "unknown algorithm '" + algorithm + "'");
}

} // namespace

SimulationResult run_simulation(const SimConfig& config) {
    require(config.reps >= 1, "reps must be at least 1");
    require(config.alpha > 0.0 && config.alpha < 1.0, "alpha must lie in (0, 1)");
    require(config.m_ci >= 0, "m_ci must be non-negative");
    for (const auto& a : config.algorithms)
        if (a != "proposed" && a != "pc-stable")
            throw Error(ErrorCode::Usage, "unknown algorithm '" + a + "'");

    const auto reps = static_cast<std::size_t>(config.reps);
    const std::size_t algos = config.algorithms.size();

    std::optional<DiscreteNet> net;
    if (config.preset == SimPreset::Categorical) {
        std::mt19937_64 rng = rep_rng(config.seed, std::numeric_limits<std::uint64_t>::max());
        net = random_discrete_net(config.k, config.max_parents, config.levels, rng);
    }

    std::vector<OracleGraph> truths(reps);
    std::vector<std::vector<Cpdag>> learned(algos, std::vector<Cpdag>(reps));
    std::vector<std::vector<double>> bic(algos, std::vector<double>(reps, 0.0));

    parallel_for(reps, config.threads, [&](std::size_t r) {
        std::mt19937_64 rng = rep_rng(config.seed, r);
        Dataset data;
        if (net) {
            data = sample_discrete_net(*net, config.n, rng);
            truths[r] = net->dag;
        } else {
            LinearSemSpec spec;
            spec.k = config.k;
            spec.rho = config.rho;
            spec.theta = config.theta;
            spec.n = config.n;
            SimulatedData sim = gen_linear_sem(spec, rng);
            data = std::move(sim.data);
            truths[r] = std::move(sim.truth);
        }
        for (std::size_t a = 0; a < algos; ++a) {
            learned[a][r] = learn_with(config.algorithms[a], data, config);
            if (config.score)
                bic[a][r] = bic_of_graph(data, learned[a][r]).bic;
        }
    });

    SimulationResult result;
    result.config = config;
    for (std::size_t a = 0; a < algos; ++a) {
        AlgorithmRun run;
        run.algorithm = config.algorithms[a];
        run.report = net ? evaluate_recovery(net->dag, learned[a]) : evaluate_recovery(truths, learned[a]);
        if (config.score) {
            run.bic = bic[a];
            run.median_bic = median(run.bic);
        }
        result.runs.push_back(std::move(run));
    }
    return result;
}

namespace {

nlohmann::ordered_json number(double v) {
    if (std::isfinite(v))
        return v;
    return nullptr;
}

} // namespace

std::string to_json(const SimulationResult& result, int indent) {
    const SimConfig& c = result.config;
    nlohmann::ordered_json j;
    nlohmann::ordered_json cfg;
    cfg["preset"] = std::string(to_string(c.preset));
    cfg["k"] = c.k;
    cfg["n"] = c.n;
    cfg["reps"] = c.reps;
    if (c.preset == SimPreset::Continuous) {
        cfg["rho"] = c.rho;
        cfg["theta"] = c.theta;
    } else {
        cfg["max_parents"] = c.max_parents;
        cfg["levels"] = c.levels;
    }
    cfg["alpha"] = c.alpha;
    cfg["m_ci"] = c.m_ci;
    cfg["seed"] = c.seed;
    j["config"] = std::move(cfg);

    auto runs = nlohmann::ordered_json::array();
    for (const auto& run : result.runs) {
        const SimReport& r = run.report;
        nlohmann::ordered_json o;
        o["algorithm"] = run.algorithm;
        o["reps"] = r.reps;
        o["tpr"] = r.tpr;
        o["tnr"] = r.tnr;
        o["auc"] = number(r.auc);
        if (c.score)
            o["median_bic"] = number(run.median_bic);
        auto roc = nlohmann::ordered_json::array();
        for (auto [fpr, tpr] : r.roc)
            roc.push_back({fpr, tpr});
        o["roc"] = std::move(roc);
        o["tpr_per_rep"] = r.tpr_per_rep;
        o["tnr_per_rep"] = r.tnr_per_rep;
        if (c.score)
            o["bic_per_rep"] = run.bic;
        o["edge_freq"] = r.edge_freq;
        runs.push_back(std::move(o));
    }
    j["runs"] = std::move(runs);
    return j.dump(indent);
}

std::string roc_csv(const SimulationResult& result) {
    std::ostringstream out;
    out.precision(17);
    out << "algorithm,fpr,tpr\n";
    for (const auto& run : result.runs)
        for (auto [fpr, tpr] : run.report.roc)
            out << run.algorithm << ',' << fpr << ',' << tpr << '\n';
    return out.str();
}

} // namespace causeweave
