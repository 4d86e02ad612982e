#include "support.hpp"

#include "causeweave/simgen.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <map>

using namespace causeweave;

namespace {

Cpdag undirected(std::size_t n, const std::vector<std::pair<VarId, VarId>>& edges) {
    Cpdag g(testkit::letters(n));
    for (auto [a, b] : edges)
        g.add_undirected(a, b);
    return g;
}

Cpdag permute(const Cpdag& g, const std::vector<VarId>& perm) {
    Cpdag out(testkit::letters(g.vertices()));
    for (auto [a, b] : g.skeleton())
        out.add_undirected(perm[static_cast<std::size_t>(a)], perm[static_cast<std::size_t>(b)]);
    return out;
}

} // namespace

TEST_CASE("rep generators are independent of each other and reproducible") {
    CHECK(rep_rng(1, 0)() == rep_rng(1, 0)());
    CHECK(rep_rng(1, 0)() != rep_rng(1, 1)());
    CHECK(rep_rng(1, 0)() != rep_rng(2, 0)());
}

TEST_CASE("no signal gives independent standard normal columns") {
    LinearSemSpec spec{10, 0.3, 0.0, 4000, 9};
    SimulatedData sim = gen_linear_sem(spec);
    const Dataset& d = sim.data;
    CHECK(d.rows() == 4000);
    CHECK(d.names().front() == "X1");
    const double n = 4000.0;
    for (VarId v = 0; v < 10; ++v) {
        const auto& x = d.values(v);
        double m = 0, s = 0;
        for (double e : x)
            m += e / n;
        for (double e : x)
            s += (e - m) * (e - m) / (n - 1);
        CHECK(std::abs(m) < 4.0 / std::sqrt(n));
        CHECK(std::abs(s - 1.0) < 4.0 * std::sqrt(2.0 / n));
    }
    // correlation between any two columns stays within 4 standard errors of 0
    for (VarId a = 0; a < 10; ++a)
        for (VarId b = a + 1; b < 10; ++b) {
            const auto& x = d.values(a);
            const auto& y = d.values(b);
            double sxy = 0, sxx = 0, syy = 0;
            for (std::size_t r = 0; r < 4000; ++r) {
                sxy += x[r] * y[r];
                sxx += x[r] * x[r];
                syy += y[r] * y[r];
            }
            CHECK(std::abs(sxy / std::sqrt(sxx * syy)) < 4.0 / std::sqrt(n));
        }
}

TEST_CASE("edge count follows the edge probability") {
    const int k = 20;
    const double rho = 0.04;
    const int draws = 1000;
    double total = 0;
    std::mt19937_64 rng(2);
    for (int i = 0; i < draws; ++i) {
        LinearSemSpec spec{k, rho, 0.5, 1, 0};
        total += static_cast<double>(gen_linear_sem(spec, rng).truth.edges().size());
    }
    const double pairs = k * (k - 1) / 2.0;
    const double se = std::sqrt(pairs * rho * (1 - rho) / draws);
    CHECK(std::abs(total / draws - pairs * rho) < 3.0 * se);
}

TEST_CASE("linear SEM is deterministic in its seed and validates input") {
    LinearSemSpec spec{6, 0.3, 0.5, 50, 5};
    CHECK(to_csv(gen_linear_sem(spec).data) == to_csv(gen_linear_sem(spec).data));
    LinearSemSpec other = spec;
    other.seed = 6;
    CHECK(to_csv(gen_linear_sem(other).data) != to_csv(gen_linear_sem(spec).data));
    LinearSemSpec bad = spec;
    bad.rho = 0.0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = spec;
    bad.k = 1;
    CHECK_THROWS_AS(gen_linear_sem(bad), Error);
}

TEST_CASE("strong signal shows up along true edges") {
    LinearSemSpec spec{8, 0.3, 2.0, 2000, 11};
    SimulatedData sim = gen_linear_sem(spec);
    for (auto [a, b] : sim.truth.edges()) {
        CITestResult r = ci_test(sim.data, a, b, sim.truth.parents(b).size() > 1
                                                     ? sets::without(sim.truth.parents(b), a)
                                                     : VarSet{});
        CHECK(r.p_value < 1e-3);
    }
}

TEST_CASE("discrete network samples match the exact joint") {
    std::mt19937_64 rng(4);
    DiscreteNet net = random_discrete_net(3, 2, 2, rng);
    double total = 0;
    std::map<std::vector<int>, double> exact;
    for (int a = 0; a < net.levels[0]; ++a)
        for (int b = 0; b < net.levels[1]; ++b)
            for (int c = 0; c < net.levels[2]; ++c) {
                exact[{a, b, c}] = net.joint_probability({a, b, c});
                total += exact[{a, b, c}];
            }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t v = 0; v < 3; ++v)
        for (const auto& dist : net.cpt[v]) {
            double s = 0;
            for (double p : dist)
                s += p;
            CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
        }

    const std::size_t n = 100000;
    Dataset d = sample_discrete_net(net, n, rng);
    std::map<std::vector<int>, double> freq;
    for (std::size_t r = 0; r < n; ++r)
        freq[{d.codes(0)[r], d.codes(1)[r], d.codes(2)[r]}] += 1.0 / n;
    double tv = 0;
    for (auto& [cell, p] : exact)
        tv += 0.5 * std::abs(p - freq[cell]);
    CHECK(tv < 0.01);
    CHECK(d.variable(0).levels.front() == "0");
}

TEST_CASE("discrete network structure rules") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        DiscreteNet net = random_discrete_net(6, 2, 4, rng);
        for (VarId v = 0; v < 6; ++v) {
            CHECK(net.dag.parents(v).size() <= 2);
            CHECK(net.levels[static_cast<std::size_t>(v)] >= 2);
            CHECK(net.levels[static_cast<std::size_t>(v)] <= 4);
            std::size_t configs = 1;
            for (VarId p : net.dag.parents(v))
                configs *= static_cast<std::size_t>(net.levels[static_cast<std::size_t>(p)]);
            CHECK(net.cpt[static_cast<std::size_t>(v)].size() == configs);
        }
    }
    DiscreteNet single = random_discrete_net(1, 3, 3, rng);
    CHECK(single.dag.vertices() == 1);
    CHECK(sample_discrete_net(single, 10, rng).rows() == 10);
    SimulatedData a = gen_discrete_net(5, 2, 3, 40, 3), b = gen_discrete_net(5, 2, 3, 40, 3);
    CHECK(to_csv(a.data) == to_csv(b.data));
    CHECK(a.truth.edges() == b.truth.edges());
}

TEST_CASE("recovery rates on trivial cases") {
    OracleGraph truth(3, {{0, 1}, {1, 2}});
    SimReport perfect = evaluate_recovery(truth, {undirected(3, {{0, 1}, {1, 2}})});
    CHECK(perfect.tpr == 1.0);
    CHECK(perfect.tnr == 1.0);
    SimReport none = evaluate_recovery(truth, {undirected(3, {})});
    CHECK(none.tpr == 0.0);
    CHECK(none.tnr == 1.0);
    SimReport all = evaluate_recovery(truth, {undirected(3, {{0, 1}, {1, 2}, {0, 2}})});
    CHECK(all.tpr == 1.0);
    CHECK(all.tnr == 0.0);
    SimReport empty_truth = evaluate_recovery(OracleGraph(3, {}), {undirected(3, {{0, 2}})});
    CHECK(empty_truth.tpr == 1.0);
    CHECK(empty_truth.tnr == doctest::Approx(2.0 / 3.0));
    CHECK_THROWS_AS(evaluate_recovery(truth, {undirected(4, {})}), Error);
}

TEST_CASE("ROC on a hand-built three-rep example") {
    // true edge A-B; reps learn {AB, AC}, {AC}, {BC}
    OracleGraph truth(3, {{0, 1}});
    std::vector<Cpdag> reps{undirected(3, {{0, 1}, {0, 2}}), undirected(3, {{0, 2}}), undirected(3, {{1, 2}})};
    SimReport r = evaluate_recovery(truth, reps);
    CHECK(r.edge_freq[0][1] == doctest::Approx(1.0 / 3.0));
    CHECK(r.edge_freq[0][2] == doctest::Approx(2.0 / 3.0));
    using P = std::pair<double, double>;
    REQUIRE(r.roc.size() == 3);
    CHECK(r.roc[0] == P{0.0, 0.0});
    CHECK(r.roc[1] == P{0.5, 0.0});
    CHECK(r.roc[2] == P{1.0, 1.0});
    CHECK(r.auc == doctest::Approx(0.25));
    CHECK(r.tpr == doctest::Approx(1.0 / 3.0));
    CHECK(r.tnr == doctest::Approx(0.5));

    std::vector<Cpdag> reversed(reps.rbegin(), reps.rend());
    CHECK(evaluate_recovery(truth, reversed).auc == r.auc);
    CHECK(trapezoid_auc({{0.0, 0.0}, {1.0, 1.0}}) == doctest::Approx(0.5));
    CHECK(std::isnan(evaluate_recovery(std::vector<OracleGraph>{truth}, {reps[0]}).auc));
}

TEST_CASE("recovery is invariant under relabelling") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 30; ++trial) {
        OracleGraph truth = testkit::random_dag(rng, 6, 3, 0.5);
        std::vector<Cpdag> learned;
        for (int rep = 0; rep < 4; ++rep) {
            std::vector<std::pair<VarId, VarId>> edges;
            for (VarId a = 0; a < 6; ++a)
                for (VarId b = a + 1; b < 6; ++b)
                    if (std::bernoulli_distribution(0.4)(rng))
                        edges.emplace_back(a, b);
            learned.push_back(undirected(6, edges));
        }
        std::vector<VarId> perm{0, 1, 2, 3, 4, 5};
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<Cpdag> relabeled;
        for (const auto& g : learned)
            relabeled.push_back(permute(g, perm));
        SimReport a = evaluate_recovery(truth, learned);
        SimReport b = evaluate_recovery(truth.permuted(perm), relabeled);
        CHECK(a.tpr == doctest::Approx(b.tpr));
        CHECK(a.tnr == doctest::Approx(b.tnr));
        CHECK(a.auc == doctest::Approx(b.auc));
    }
}

TEST_CASE("median") {
    CHECK(median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
}

TEST_CASE("small simulation runs are reproducible across thread counts") {
    SimConfig c = SimConfig::categorical();
    c.k = 5;
    c.n = 150;
    c.reps = 4;
    c.seed = 3;
    SimulationResult one = run_simulation(c);
    c.threads = 4;
    SimulationResult many = run_simulation(c);
    CHECK(to_json(one) == to_json(many));
    CHECK(roc_csv(one) == roc_csv(many));
    auto j = nlohmann::json::parse(to_json(one));
    CHECK(j["runs"].size() == 2);
    CHECK(j["runs"][0]["algorithm"] == "proposed");
    CHECK(j["runs"][0]["tpr_per_rep"].size() == 4);

    SimConfig cont = SimConfig::continuous(0.5);
    CHECK(cont.alpha == 0.01);
    CHECK(cont.m_ci == 2);
    cont.k = 5;
    cont.n = 100;
    cont.reps = 2;
    cont.rho = 0.3;
    auto jc = nlohmann::json::parse(to_json(run_simulation(cont)));
    CHECK(jc["runs"][0]["auc"].is_null());
}
