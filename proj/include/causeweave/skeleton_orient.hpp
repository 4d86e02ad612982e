#pragma once

#include "causeweave/citest.hpp"
#include "causeweave/forward.hpp"
#include "causeweave/graph.hpp"
#include "causeweave/maximize.hpp"

#include <string>
#include <vector>

namespace causeweave {

/// Undirected graph with X - Y present iff X is in N_Y or Y is in N_X.
/// `selections` holds one entry per vertex, indexed by target id.
Cpdag build_skeleton(const std::vector<std::string>& names, const std::vector<NeighborSelection>& selections);

/// P(X, Y) = min{ S_{N_X}(X, Y), S_{N_Y}(X, Y) }, each endpoint's neighborhood
/// taken without the other endpoint.
double edge_significance(VarId x, VarId y, const std::vector<NeighborSelection>& selections, const CiTester& ci,
                         int m_ci);

struct UnshieldedCollider {
    VarId a = 0; // a < b
    VarId collider = 0;
    VarId b = 0;
    friend auto operator<=>(const UnshieldedCollider&, const UnshieldedCollider&) = default;
};

/// Orients a skeleton whose `sepsets` are filled in:
///   1. prior knowledge (required, forbidden, tiers);
///   2. v-structures a -> z <- b for non-adjacent a, b with z outside S(a, b),
///      applied in descending order of the p-value of S(a, b) so that on
///      conflict the better-separated pair wins;
///   3. the two propagation rules to a fixed point.
/// Orientations that contradict prior knowledge or would close a directed
/// cycle are skipped and reported in `log`.
/// Throws PriorKnowledgeCycle when prior knowledge alone is cyclic.
Cpdag orient(Cpdag skeleton, const PriorKnowledge& prior = {}, std::vector<std::string>* log = nullptr);

/// Re-applies the two propagation rules; returns the number of edges oriented.
std::size_t propagate(Cpdag& g, const PriorKnowledge& prior = {});

/// a -> z <- b with a, b non-adjacent.
std::vector<UnshieldedCollider> v_structures(const Cpdag& g);
std::vector<UnshieldedCollider> v_structures(const OracleGraph& g);

struct LearnOptions {
    double alpha = 0.05;
    int m_ci = 3;
    std::size_t budget = 1'000'000;
    int threads = 1;
    bool early_exit = true;
};

struct LearnResult {
    Cpdag graph;
    std::vector<NeighborhoodFamily> families; // by target
    std::vector<NeighborSelection> selections; // by target
    std::vector<std::string> log;
};

/// Forward step + maximization step for every vertex, then skeleton,
/// edge significance, separation sets and orientation.
LearnResult learn_structure(const std::vector<std::string>& names, const CiTester& ci,
                            const LearnOptions& options = {}, const PriorKnowledge& prior = {});

} // namespace causeweave
