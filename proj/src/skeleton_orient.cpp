#include "causeweave/skeleton_orient.hpp"

#include "causeweave/parallel.hpp"

#include <algorithm>
#include <memory>
#include <numeric>

namespace causeweave {

Cpdag build_skeleton(const std::vector<std::string>& names, const std::vector<NeighborSelection>& selections) {
    require(selections.size() == names.size(), "build_skeleton needs one selection per vertex");
    Cpdag g(names);
    for (std::size_t x = 0; x < selections.size(); ++x) {
        require(selections[x].target == static_cast<VarId>(x), "selections must be indexed by target");
        for (VarId y : selections[x].chosen.members)
            g.add_undirected(static_cast<VarId>(x), y);
    }
    return g;
}

double edge_significance(VarId x, VarId y, const std::vector<NeighborSelection>& selections, const CiTester& ci,
                         int m_ci) {
    const auto& nx = selections.at(static_cast<std::size_t>(x)).chosen.members;
    const auto& ny = selections.at(static_cast<std::size_t>(y)).chosen.members;
    double sx = sep_score(x, y, sets::without(nx, y), ci, m_ci).value;
    double sy = sep_score(y, x, sets::without(ny, x), ci, m_ci).value;
    return std::min(sx, sy);
}

namespace {

struct Candidate {
    UnshieldedCollider v;
    double p = 0.0;
};

std::string describe(const Cpdag& g, const UnshieldedCollider& v) {
    const auto& n = g.names();
    return n[static_cast<std::size_t>(v.a)] + " -> " + n[static_cast<std::size_t>(v.collider)] + " <- " +
           n[static_cast<std::size_t>(v.b)];
}

void apply_prior(Cpdag& g, const PriorKnowledge& prior) {
    if (prior.empty())
        return;
    prior.validate(g.vertices());
    for (auto [a, b] : g.skeleton()) {
        if (prior.required.count({a, b})) {
            g.orient(a, b);
        } else if (prior.required.count({b, a})) {
            g.orient(b, a);
        } else {
            bool ab = prior.allows(a, b);
            bool ba = prior.allows(b, a);
            if (ab && !ba)
                g.orient(a, b);
            else if (ba && !ab)
                g.orient(b, a);
        }
    }
    if (g.has_directed_cycle())
        throw Error(ErrorCode::PriorKnowledgeCycle, "prior-knowledge orientations form a directed cycle");
}

} // namespace

std::size_t propagate(Cpdag& g, const PriorKnowledge& prior) {
    std::size_t oriented = 0;
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto [u, v] : g.undirected_edges()) {
            for (auto [from, to] : {VertexPair{u, v}, VertexPair{v, u}}) {
                if (!prior.allows(from, to))
                    continue;
                bool fire = false;
                // w -> from - to with w, to non-adjacent
                for (VarId w : g.parents(from))
                    if (w != to && !g.adjacent(w, to)) {
                        fire = true;
                        break;
                    }
                // from - to with a directed path from -> ... -> to
                if (!fire)
                    fire = g.has_directed_path(from, to);
                if (fire && !g.has_directed_path(to, from)) {
                    g.orient(from, to);
                    ++oriented;
                    changed = true;
                    break;
                }
            }
        }
    }
    return oriented;
}

Cpdag orient(Cpdag g, const PriorKnowledge& prior, std::vector<std::string>* log) {
    apply_prior(g, prior);

    std::vector<Candidate> candidates;
    const auto p = static_cast<VarId>(g.vertices());
    for (VarId z = 0; z < p; ++z) {
        VarSet nb = g.neighbors(z);
        for (std::size_t i = 0; i < nb.size(); ++i)
            for (std::size_t j = i + 1; j < nb.size(); ++j) {
                VarId a = nb[i], b = nb[j];
                if (g.adjacent(a, b))
                    continue;
                auto it = g.sepsets.find(unordered_pair(a, b));
                if (it == g.sepsets.end() || sets::contains(it->second.witness, z))
                    continue;
                candidates.push_back({{a, z, b}, it->second.p_value});
            }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& l, const Candidate& r) {
        if (l.p != r.p)
            return l.p > r.p;
        return l.v < r.v;
    });

    for (const auto& c : candidates) {
        const auto [a, z, b] = c.v;
        auto note = [&](const std::string& why) {
            if (log)
                log->push_back("skipped v-structure " + describe(g, c.v) + ": " + why);
        };
        if (g.directed(z, a) || g.directed(z, b)) {
            note("conflicts with an orientation of higher precedence");
            continue;
        }
        if (!prior.allows(a, z) || !prior.allows(b, z)) {
            note("contradicts prior knowledge");
            continue;
        }
        if (g.has_directed_path(z, a) || g.has_directed_path(z, b)) {
            note("would create a directed cycle");
            continue;
        }
        g.orient(a, z);
        g.orient(b, z);
    }

    propagate(g, prior);
    return g;
}

std::vector<UnshieldedCollider> v_structures(const Cpdag& g) {
    std::vector<UnshieldedCollider> out;
    const auto p = static_cast<VarId>(g.vertices());
    for (VarId z = 0; z < p; ++z) {
        VarSet pa = g.parents(z);
        for (std::size_t i = 0; i < pa.size(); ++i)
            for (std::size_t j = i + 1; j < pa.size(); ++j)
                if (!g.adjacent(pa[i], pa[j]))
                    out.push_back({pa[i], z, pa[j]});
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<UnshieldedCollider> v_structures(const OracleGraph& g) {
    std::vector<UnshieldedCollider> out;
    for (VarId z = 0; z < static_cast<VarId>(g.vertices()); ++z) {
        const VarSet& pa = g.parents(z);
        for (std::size_t i = 0; i < pa.size(); ++i)
            for (std::size_t j = i + 1; j < pa.size(); ++j)
                if (!g.adjacent(pa[i], pa[j]))
                    out.push_back({pa[i], z, pa[j]});
    }
    std::sort(out.begin(), out.end());
    return out;
}

LearnResult learn_structure(const std::vector<std::string>& names, const CiTester& ci, const LearnOptions& options,
                            const PriorKnowledge& prior) {
    const std::size_t p = names.size();
    require(ci.variables() == p, "CI backend and vertex list disagree on the number of variables");
    if (!prior.empty())
        prior.validate(p);

    std::vector<VarId> vars(p);
    std::iota(vars.begin(), vars.end(), 0);

    ForwardOptions fwd;
    fwd.alpha = options.alpha;
    fwd.m_ci = options.m_ci;
    fwd.budget = options.budget;

    LearnResult result;
    result.families.resize(p);
    result.selections.resize(p);
    // sep[x][y] = S over N_x \ {y} of (x, y); used for significance and sepsets
    std::vector<std::vector<SepScore>> sep(p, std::vector<SepScore>(p));

    parallel_for(p, options.threads, [&](std::size_t i) {
        const auto x = static_cast<VarId>(i);
        result.families[i] = forward_step(x, vars, ci, fwd);
        SepScorer scorer(x, ci, options.m_ci);
        result.selections[i] = maximization_step(scorer, result.families[i], vars, options.early_exit);
        const VarSet& nx = result.selections[i].chosen.members;
        for (VarId y : vars)
            if (y != x)
                sep[i][static_cast<std::size_t>(y)] = scorer.score(y, sets::without(nx, y));
    });

    Cpdag g = build_skeleton(names, result.selections);
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = a + 1; b < p; ++b) {
            const SepScore& ab = sep[a][b];
            const SepScore& ba = sep[b][a];
            auto key = unordered_pair(static_cast<VarId>(a), static_cast<VarId>(b));
            if (g.adjacent(static_cast<VarId>(a), static_cast<VarId>(b))) {
                g.significance[key] = std::min(ab.value, ba.value);
            } else {
                bool take_ab = ab.value > ba.value || (ab.value == ba.value && ab.witness <= ba.witness);
                const SepScore& best = take_ab ? ab : ba;
                g.sepsets[key] = {best.witness, best.value};
            }
        }

    result.graph = orient(std::move(g), prior, &result.log);
    return result;
}

} // namespace causeweave
