#include "causeweave/forward.hpp"

#include <json.hpp>

#include <algorithm>
#include <limits>

namespace causeweave {

namespace {

bool by_size_then_members(const VarSet& a, const VarSet& b) {
    if (a.size() != b.size())
        return a.size() < b.size();
    return a < b;
}

} // namespace

ForwardSearch::ForwardSearch(VarId target, std::vector<VarId> order, CiTester ci, ForwardOptions options)
    : target_(target), order_(std::move(order)), ci_(ci), options_(options) {
    require(options_.alpha > 0.0 && options_.alpha < 1.0, "alpha must lie in (0,1)");
    require(options_.m_ci >= 1, "m_ci must be at least 1");
    pos_.assign(ci_.variables(), std::numeric_limits<std::size_t>::max());
    for (std::size_t i = 0; i < order_.size(); ++i) {
        VarId v = order_[i];
        if (v < 0 || static_cast<std::size_t>(v) >= ci_.variables())
            throw Error(ErrorCode::UnknownVertex, "enumeration order references an unknown vertex");
        require(v != target_, "enumeration order must not contain the target");
        pos_[static_cast<std::size_t>(v)] = i;
    }
}

bool ForwardSearch::dependent(VarId v, const VarSet& given) const {
    return ci_.p_value(target_, v, given) < options_.alpha;
}

VarId ForwardSearch::last_member(const VarSet& s) const {
    return *std::max_element(s.begin(), s.end(), [&](VarId a, VarId b) { return position(a) < position(b); });
}

bool ForwardSearch::admissible(const VarSet& s) {
    if (s.empty())
        return true;
    VarId last = last_member(s);
    return sets::contains(extensions(sets::without(s, last)), last);
}

const VarSet& ForwardSearch::extensions(const VarSet& s) {
    auto it = memo_.find(s);
    if (it != memo_.end())
        return it->second;
    VarSet c = compute(s);
    return memo_.emplace(s, std::move(c)).first->second;
}

VarSet ForwardSearch::compute(const VarSet& s) {
    VarSet out;
    if (s.empty()) {
        for (VarId t : order_)
            if (dependent(t, {}))
                out.push_back(t);
        return sets::make(std::move(out));
    }
    if (!admissible(s))
        return out;

    // C*_X(S) restricted to L_X(S)
    const std::size_t last_pos = position(last_member(s));
    VarSet upper;
    for (VarId t : extensions(sets::without_index(s, 0)))
        if (position(t) > last_pos)
            upper.push_back(t);
    for (std::size_t i = 1; i < s.size() && !upper.empty(); ++i)
        upper = sets::intersect(upper, extensions(sets::without_index(s, i)));

    if (static_cast<int>(s.size()) > options_.m_ci)
        return upper;

    for (VarId c : upper) {
        if (!dependent(c, s))
            continue;
        bool keep = true;
        for (std::size_t i = 0; i < s.size() && keep; ++i)
            keep = dependent(s[i], sets::with(sets::without_index(s, i), c));
        if (keep)
            out.push_back(c);
    }
    return out;
}

NeighborhoodFamily ForwardSearch::run(std::vector<ForwardTraceEntry>* trace) {
    NeighborhoodFamily result;
    result.target = target_;
    result.alpha = options_.alpha;
    result.m_ci = options_.m_ci;

    std::vector<VarSet> terminal;
    std::vector<VarSet> level{VarSet{}};
    while (!level.empty()) {
        std::sort(level.begin(), level.end());
        std::vector<VarSet> next;
        for (const VarSet& s : level) {
            if (++result.expanded > options_.budget)
                throw Error(ErrorCode::BudgetExceeded, "forward search for vertex " + std::to_string(target_) +
                                                           " exceeded the budget of " +
                                                           std::to_string(options_.budget) + " expanded sets");
            const VarSet& c = extensions(s);
            if (trace)
                trace->push_back({s, c});
            if (c.empty()) {
                terminal.push_back(s);
                continue;
            }
            for (VarId t : c)
                next.push_back(sets::with(s, t));
        }
        // keep only the previous level alive: C* of level k+1 needs level k only
        if (!level.empty() && !level.front().empty()) {
            const std::size_t drop = level.front().size() - 1;
            for (auto it = memo_.begin(); it != memo_.end();)
                it = it->first.size() == drop ? memo_.erase(it) : std::next(it);
        }
        level = std::move(next);
    }

    for (VarSet& s : maximal_sets(std::move(terminal))) {
        bool verified = static_cast<int>(s.size()) <= options_.m_ci + 1;
        result.family.push_back({std::move(s), verified});
    }
    return result;
}

VarSet candidate_extensions(VarId x, const VarSet& s, const std::vector<VarId>& order, const CiTester& ci,
                            double alpha, int m_ci) {
    ForwardOptions opts;
    opts.alpha = alpha;
    opts.m_ci = m_ci;
    ForwardSearch search(x, order, ci, opts);
    return search.extensions(s);
}

NeighborhoodFamily forward_step(VarId x, const std::vector<VarId>& vars, const CiTester& ci,
                                const ForwardOptions& options, std::vector<ForwardTraceEntry>* trace) {
    require(std::find(vars.begin(), vars.end(), x) != vars.end(), "forward_step: target must be in the vertex set");
    std::vector<VarId> order;
    for (VarId v : vars)
        if (v != x)
            order.push_back(v);
    ForwardSearch search(x, std::move(order), ci, options);
    return search.run(trace);
}

std::vector<VarSet> maximal_sets(std::vector<VarSet> sets) {
    std::sort(sets.begin(), sets.end(), by_size_then_members);
    sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
    std::vector<VarSet> out;
    for (std::size_t i = 0; i < sets.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = i + 1; j < sets.size() && !dominated; ++j)
            dominated = sets::is_proper_subset(sets[i], sets[j]);
        if (!dominated)
            out.push_back(sets[i]);
    }
    return out;
}

std::string trace_to_jsonl(const std::vector<ForwardTraceEntry>& trace) {
    std::string out;
    for (const auto& e : trace) {
        nlohmann::json j{{"set", e.set}, {"extensions", e.extensions}};
        out += j.dump();
        out.push_back('\n');
    }
    return out;
}

} // namespace causeweave
