// Generators and brute-force reference implementations shared by the unit
// tests and the acceptance runner. Everything here is deliberately naive.
#pragma once

#include "causeweave/citest.hpp"
#include "causeweave/graph.hpp"
#include "causeweave/types.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <vector>

namespace testkit {

using causeweave::CiKey;
using causeweave::InjectedEntry;
using causeweave::OracleGraph;
using causeweave::VarId;
using causeweave::VarSet;

/// All subsets of `s`, as sorted vectors.
inline std::vector<VarSet> power_set(const VarSet& s) {
    std::vector<VarSet> out;
    const std::size_t n = s.size();
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        VarSet sub;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (1u << i))
                sub.push_back(s[i]);
        out.push_back(sub);
    }
    return out;
}

inline VarSet minus(VarSet s, VarId v) {
    s.erase(std::remove(s.begin(), s.end(), v), s.end());
    return s;
}

/// Random DAG on n vertices where every vertex has total degree <= max_degree.
/// Edges are proposed in random order and kept when both ends have room.
inline OracleGraph random_dag(std::mt19937_64& rng, int n, int max_degree, double density = 0.5) {
    std::vector<VarId> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        order[static_cast<std::size_t>(i)] = i;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            pairs.emplace_back(i, j);
    std::shuffle(pairs.begin(), pairs.end(), rng);
    std::bernoulli_distribution keep(density);
    std::vector<int> degree(static_cast<std::size_t>(n), 0);
    std::vector<std::pair<VarId, VarId>> edges;
    for (auto [i, j] : pairs) {
        VarId a = order[static_cast<std::size_t>(i)], b = order[static_cast<std::size_t>(j)];
        if (!keep(rng) || degree[static_cast<std::size_t>(a)] >= max_degree ||
            degree[static_cast<std::size_t>(b)] >= max_degree)
            continue;
        ++degree[static_cast<std::size_t>(a)];
        ++degree[static_cast<std::size_t>(b)];
        edges.emplace_back(a, b);
    }
    return OracleGraph(static_cast<std::size_t>(n), edges);
}

inline bool is_ancestor(const OracleGraph& g, VarId a, VarId of) {
    // a is an ancestor of `of` (reflexive)
    std::vector<VarId> stack{of};
    std::set<VarId> seen{of};
    while (!stack.empty()) {
        VarId v = stack.back();
        stack.pop_back();
        if (v == a)
            return true;
        for (VarId p : g.parents(v))
            if (seen.insert(p).second)
                stack.push_back(p);
    }
    return false;
}

/// d-separation by enumerating every simple path and checking the
/// collider / non-collider conditions directly.
inline bool brute_d_sep(const OracleGraph& g, VarId x, VarId y, const VarSet& s) {
    const std::set<VarId> cond(s.begin(), s.end());
    auto collider_open = [&](VarId c) {
        for (VarId z : s)
            if (is_ancestor(g, c, z))
                return true;
        return false;
    };
    std::vector<VarId> path{x};
    std::vector<bool> on(g.vertices(), false);
    on[static_cast<std::size_t>(x)] = true;
    std::function<bool(VarId)> open_path = [&](VarId v) -> bool {
        if (v == y) {
            for (std::size_t i = 1; i + 1 < path.size(); ++i) {
                VarId prev = path[i - 1], mid = path[i], next = path[i + 1];
                bool collider = g.has_edge(prev, mid) && g.has_edge(next, mid);
                if (collider ? !collider_open(mid) : cond.count(mid) > 0)
                    return false;
            }
            return true;
        }
        for (VarId u = 0; u < static_cast<VarId>(g.vertices()); ++u) {
            if (on[static_cast<std::size_t>(u)] || !g.adjacent(v, u))
                continue;
            on[static_cast<std::size_t>(u)] = true;
            path.push_back(u);
            bool found = open_path(u);
            path.pop_back();
            on[static_cast<std::size_t>(u)] = false;
            if (found)
                return true;
        }
        return false;
    };
    return !open_path(x);
}

/// Random p-value for every canonical query over `p` variables. About
/// `dep_share` of the values fall below 0.05; a few ties are planted so that
/// tie-breaking paths are exercised.
inline std::vector<InjectedEntry> random_table(std::mt19937_64& rng, int p, double dep_share = 0.6) {
    std::bernoulli_distribution dep(dep_share);
    std::uniform_real_distribution<double> low(0.0, 0.05), high(0.05, 1.0);
    std::uniform_int_distribution<int> tie(0, 9);
    const double planted[] = {0.01, 0.2, 0.5};
    std::vector<InjectedEntry> out;
    for (VarId a = 0; a < p; ++a)
        for (VarId b = a + 1; b < p; ++b) {
            VarSet rest;
            for (VarId v = 0; v < p; ++v)
                if (v != a && v != b)
                    rest.push_back(v);
            for (const VarSet& s : power_set(rest)) {
                double v;
                int t = tie(rng);
                if (t < 3)
                    v = planted[t];
                else
                    v = dep(rng) ? low(rng) : high(rng);
                out.push_back({a, b, s, v});
            }
        }
    return out;
}

/// Lookup table view of an injected table.
struct PTable {
    std::map<CiKey, double> p;
    explicit PTable(const std::vector<InjectedEntry>& t) {
        for (const auto& e : t)
            p[CiKey::make(e.x, e.y, e.s)] = e.p;
    }
    double operator()(VarId x, VarId y, const VarSet& s) const { return p.at(CiKey::make(x, y, s)); }
};

/// Dependence condition: every member of `u` stays dependent on `x` given
/// every subset (of size <= cap) of the other members.
inline bool all_dependent(const PTable& t, VarId x, const VarSet& u, double alpha, int cap) {
    for (VarId m : u)
        for (const VarSet& s : power_set(minus(u, m)))
            if (static_cast<int>(s.size()) <= cap && t(x, m, s) >= alpha)
                return false;
    return true;
}

/// C_X(S) by definition: members T after the last member of S (in `order`)
/// such that S + T satisfies the dependence condition; empty when S fails.
inline VarSet definitional_extensions(const PTable& t, VarId x, const VarSet& s, const std::vector<VarId>& order,
                                      double alpha, int cap) {
    if (!all_dependent(t, x, s, alpha, cap))
        return {};
    auto pos = [&](VarId v) { return std::find(order.begin(), order.end(), v) - order.begin(); };
    std::ptrdiff_t last = -1;
    for (VarId v : s)
        last = std::max(last, pos(v));
    VarSet out;
    for (VarId c : order)
        if (pos(c) > last && !std::count(s.begin(), s.end(), c)) {
            VarSet u = s;
            u.push_back(c);
            std::sort(u.begin(), u.end());
            if (all_dependent(t, x, u, alpha, cap))
                out.push_back(c);
        }
    std::sort(out.begin(), out.end());
    return out;
}

struct Best {
    double value = -1.0;
    VarSet witness;
};

/// max over subsets S of n with |S| <= cap of p(x, y | S); ties go to the
/// lexicographically smallest witness.
inline Best exhaustive_sep(const PTable& t, VarId x, VarId y, const VarSet& n, int cap) {
    Best best;
    for (const VarSet& s : power_set(n)) {
        if (static_cast<int>(s.size()) > cap)
            continue;
        double v = t(x, y, s);
        if (v > best.value || (v == best.value && s < best.witness)) {
            best.value = v;
            best.witness = s;
        }
    }
    return best;
}

/// Parents and children of v.
inline VarSet pc_set(const OracleGraph& g, VarId v) {
    VarSet out = g.parents(v);
    out.insert(out.end(), g.children(v).begin(), g.children(v).end());
    std::sort(out.begin(), out.end());
    return out;
}

inline std::set<std::pair<VarId, VarId>> skeleton_of(const OracleGraph& g) {
    std::set<std::pair<VarId, VarId>> out;
    for (auto [a, b] : g.edges())
        out.insert({std::min(a, b), std::max(a, b)});
    return out;
}

inline std::set<std::pair<VarId, VarId>> skeleton_of(const causeweave::Cpdag& g) {
    auto sk = g.skeleton();
    return {sk.begin(), sk.end()};
}

/// Unshielded colliders a -> z <- b (a < b) by scanning all triples.
inline std::set<std::tuple<VarId, VarId, VarId>> brute_v_structures(const OracleGraph& g) {
    std::set<std::tuple<VarId, VarId, VarId>> out;
    const auto n = static_cast<VarId>(g.vertices());
    for (VarId z = 0; z < n; ++z)
        for (VarId a = 0; a < n; ++a)
            for (VarId b = a + 1; b < n; ++b)
                if (a != z && b != z && g.has_edge(a, z) && g.has_edge(b, z) && !g.adjacent(a, b))
                    out.insert({a, z, b});
    return out;
}

inline std::set<std::tuple<VarId, VarId, VarId>> brute_v_structures(const causeweave::Cpdag& g) {
    std::set<std::tuple<VarId, VarId, VarId>> out;
    const auto n = static_cast<VarId>(g.vertices());
    for (VarId z = 0; z < n; ++z)
        for (VarId a = 0; a < n; ++a)
            for (VarId b = a + 1; b < n; ++b)
                if (a != z && b != z && g.directed(a, z) && g.directed(b, z) && !g.adjacent(a, b))
                    out.insert({a, z, b});
    return out;
}

/// Every non-adjacent pair (v, m) can be separated by a subset of PC(v):
/// the premise under which the true PC set is a candidate neighbourhood.
inline bool separable_by_neighbors(const OracleGraph& g) {
    const auto n = static_cast<VarId>(g.vertices());
    for (VarId v = 0; v < n; ++v)
        for (VarId m = 0; m < n; ++m) {
            if (m == v || g.adjacent(v, m))
                continue;
            bool ok = false;
            for (const VarSet& s : power_set(minus(pc_set(g, v), m)))
                if (brute_d_sep(g, v, m, s)) {
                    ok = true;
                    break;
                }
            if (!ok)
                return false;
        }
    return true;
}

inline std::vector<std::string> letters(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(std::string(1, static_cast<char>('A' + i)));
    return out;
}

} // namespace testkit
