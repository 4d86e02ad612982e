#include "causeweave/pcstable.hpp"

#include "causeweave/parallel.hpp"
#include "causeweave/skeleton_orient.hpp"

#include <algorithm>
#include <optional>

namespace causeweave {

namespace {

struct EdgeOutcome {
    std::optional<SepsetRecord> separated;
    double max_p = 0.0;
};

} // namespace

Cpdag pc_stable_skeleton(const std::vector<std::string>& names, const CiTester& ci, const PcStableOptions& options) {
    require(options.alpha > 0.0 && options.alpha < 1.0, "alpha must lie in (0, 1)");
    require(options.m_ci >= 0, "m_ci must be non-negative");
    const std::size_t p = names.size();
    require(ci.variables() == p, "CI backend and vertex list disagree on the number of variables");

    Cpdag g(names);
    for (VarId a = 0; a < static_cast<VarId>(p); ++a)
        for (VarId b = a + 1; b < static_cast<VarId>(p); ++b)
            g.add_undirected(a, b);

    std::map<VertexPair, double> max_p;
    for (int level = 0; level <= options.m_ci; ++level) {
        std::vector<VarSet> adj(p);
        bool any = false;
        for (std::size_t v = 0; v < p; ++v) {
            adj[v] = g.neighbors(static_cast<VarId>(v));
            if (adj[v].size() > static_cast<std::size_t>(level))
                any = true;
        }
        if (!any)
            break;

        const auto edges = g.skeleton();
        std::vector<EdgeOutcome> outcome(edges.size());
        parallel_for(edges.size(), options.threads, [&](std::size_t e) {
            auto [a, b] = edges[e];
            EdgeOutcome& out = outcome[e];
            for (auto [x, y] : {VertexPair{a, b}, VertexPair{b, a}}) {
                VarSet pool = sets::without(adj[static_cast<std::size_t>(x)], y);
                if (pool.size() < static_cast<std::size_t>(level))
                    continue;
                sets::for_each_subset_of_size(pool, static_cast<std::size_t>(level), [&](const VarSet& s) {
                    double pv = ci.p_value(a, b, s);
                    out.max_p = std::max(out.max_p, pv);
                    if (pv >= options.alpha) {
                        out.separated = SepsetRecord{s, pv};
                        return false;
                    }
                    return true;
                });
                if (out.separated)
                    break;
            }
        });

        for (std::size_t e = 0; e < edges.size(); ++e) {
            auto& best = max_p[edges[e]];
            best = std::max(best, outcome[e].max_p);
            if (outcome[e].separated) {
                g.remove_edge(edges[e].first, edges[e].second);
                g.sepsets[edges[e]] = *outcome[e].separated;
                max_p.erase(edges[e]);
            }
        }
    }
    for (const auto& [pair, pv] : max_p)
        g.significance[pair] = pv;
    return g;
}

Cpdag pc_stable(const std::vector<std::string>& names, const CiTester& ci, const PcStableOptions& options,
                const PriorKnowledge& prior, std::vector<std::string>* log) {
    return orient(pc_stable_skeleton(names, ci, options), prior, log);
}

} // namespace causeweave
