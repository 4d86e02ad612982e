#pragma once

#include "causeweave/citest.hpp"
#include "causeweave/graph.hpp"

#include <string>
#include <vector>

namespace causeweave {

struct PcStableOptions {
    double alpha = 0.05;
    /// Largest conditioning set tried; doubles as the PC depth cap.
    int m_ci = 3;
    int threads = 1;
};

/// Order-independent PC skeleton. Starting from the complete graph, level l
/// tests every remaining edge X - Y against all size-l subsets of the
/// adjacencies of X (then of Y) frozen at the start of the level. An edge is
/// dropped at the end of the level if some test gives p >= alpha; that first
/// separating set and its p-value become the sepset. Surviving edges carry the
/// largest p-value seen for them as significance.
Cpdag pc_stable_skeleton(const std::vector<std::string>& names, const CiTester& ci,
                         const PcStableOptions& options = {});

/// Skeleton followed by the shared orientation step.
Cpdag pc_stable(const std::vector<std::string>& names, const CiTester& ci, const PcStableOptions& options = {},
                const PriorKnowledge& prior = {}, std::vector<std::string>* log = nullptr);

} // namespace causeweave
