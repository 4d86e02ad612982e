#pragma once

#include "causeweave/citest.hpp"
#include "causeweave/dataset.hpp"
#include "causeweave/graph.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace causeweave {

/// Generator for rep `rep` of a run seeded with `master`; independent of
/// which thread runs the rep.
std::mt19937_64 rep_rng(std::uint64_t master, std::uint64_t rep);

struct LinearSemSpec {
    int k = 20;
    double rho = 0.04;  // edge probability
    double theta = 0.5; // signal strength
    std::size_t n = 500;
    std::uint64_t seed = 1;

    /// Throws PreconditionViolation unless 0 < rho < 1, n >= 1 and k >= 2.
    void validate() const;
};

struct SimulatedData {
    Dataset data;
    OracleGraph truth; // ids match data columns
};

/// x_j = theta * sum_{i<j} x_i E_ij S_ij + e_j with E_ij ~ Bernoulli(rho),
/// S_ij ~ N(0, 1), e_j ~ N(0, 1), generated in causal order; the columns and
/// the true DAG are then permuted by one random permutation.
SimulatedData gen_linear_sem(const LinearSemSpec& spec);
SimulatedData gen_linear_sem(const LinearSemSpec& spec, std::mt19937_64& rng);

/// Random discrete Bayesian network: DAG plus one Dirichlet(1) distribution
/// per vertex and parent configuration.
struct DiscreteNet {
    OracleGraph dag;
    std::vector<int> levels;
    /// cpt[v][config] is the distribution of v given the parent configuration
    /// `config`, parents taken in ascending id order with the first parent
    /// varying fastest.
    std::vector<std::vector<std::vector<double>>> cpt;

    std::size_t config_index(VarId v, const std::vector<int>& assignment) const;
    /// P(assignment) as the product of the CPT entries.
    double joint_probability(const std::vector<int>& assignment) const;
};

/// Vertices are generated in a random order; vertex j of that order draws a
/// parent count uniformly from {0, ..., min(max_parents, j)} and the parents
/// uniformly from the earlier vertices. Level counts are uniform in
/// [2, levels].
DiscreteNet random_discrete_net(int k, int max_parents, int levels, std::mt19937_64& rng);

/// Ancestral sampling; columns are categorical with levels "0", "1", ...
Dataset sample_discrete_net(const DiscreteNet& net, std::size_t n, std::mt19937_64& rng);

SimulatedData gen_discrete_net(int k, int max_parents, int levels, std::size_t n, std::uint64_t seed);

struct SimReport {
    int reps = 0;
    double tpr = 0.0; // mean over reps
    double tnr = 0.0;
    std::vector<double> tpr_per_rep;
    std::vector<double> tnr_per_rep;
    /// Fraction of reps in which each pair is adjacent; empty when the reps do
    /// not share one true graph.
    std::vector<std::vector<double>> edge_freq;
    /// (fpr, tpr) sorted by fpr, ties collapsed to the largest tpr.
    std::vector<std::pair<double, double>> roc;
    double auc = 0.0; // NaN when roc is empty
};

/// Skeleton-level recovery against one fixed truth. TPR is taken as 1 when
/// the truth has no edges and TNR as 1 when it is complete.
/// Throws VertexMismatch when a learned graph has a different vertex count.
SimReport evaluate_recovery(const OracleGraph& truth, const std::vector<Cpdag>& learned);

/// Same with a separate truth per rep; edge_freq, roc and auc are left empty.
SimReport evaluate_recovery(const std::vector<OracleGraph>& truths, const std::vector<Cpdag>& learned);

/// ROC of thresholded edge frequencies: an edge is kept when its frequency is
/// at least the cutoff. Cutoffs run over +inf, every distinct frequency and 0.
std::vector<std::pair<double, double>> edge_roc(const OracleGraph& truth,
                                                const std::vector<std::vector<double>>& edge_freq);
double trapezoid_auc(const std::vector<std::pair<double, double>>& roc);

// ---------------------------------------------------------------------------
// simulation runs

enum class SimPreset { Continuous, Categorical };

std::string_view to_string(SimPreset p);
SimPreset parse_sim_preset(std::string_view s);

struct SimConfig {
    SimPreset preset = SimPreset::Categorical;
    int k = 20;
    std::size_t n = 500;
    int reps = 100;
    // continuous preset
    double rho = 0.04;
    double theta = 0.5;
    // categorical preset
    int max_parents = 3;
    int levels = 3;

    double alpha = 0.05;
    int m_ci = 3;
    std::size_t budget = 1'000'000;
    std::vector<std::string> algorithms{"proposed", "pc-stable"};
    bool score = true;
    std::uint64_t seed = 1;
    int threads = 1;

    /// Standard presets: continuous uses alpha 0.01 and a conditioning cap of 2.
    static SimConfig continuous(double theta, double rho = 0.04);
    static SimConfig categorical();
};

struct AlgorithmRun {
    std::string algorithm;
    SimReport report;
    std::vector<double> bic; // per rep; empty when scoring is off
    double median_bic = 0.0;
};

struct SimulationResult {
    SimConfig config;
    std::vector<AlgorithmRun> runs;
};

/// Categorical: one true network drawn from the master seed, fresh data per
/// rep. Continuous: a fresh DAG and data set per rep. Reps run in parallel.
SimulationResult run_simulation(const SimConfig& config);

std::string to_json(const SimulationResult& result, int indent = 2);
/// algorithm,fpr,tpr rows.
std::string roc_csv(const SimulationResult& result);

double median(std::vector<double> values);

} // namespace causeweave
