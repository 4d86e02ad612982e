#include "causeweave/maximize.hpp"

#include <algorithm>

namespace causeweave {

namespace {

// larger value wins; equal values keep the lexicographically smaller witness
bool better(double value, const VarSet& witness, const SepScore& current) {
    if (value != current.value)
        return value > current.value;
    return witness < current.witness;
}

} // namespace

SepScorer::SepScorer(VarId target, CiTester ci, int m_ci) : target_(target), ci_(ci), m_ci_(m_ci) {
    require(m_ci >= 0, "m_ci must be non-negative");
}

const SepScore& SepScorer::score(VarId other, const VarSet& n) {
    CiKey key{other, target_, n};
    if (auto it = memo_.find(key); it != memo_.end())
        return it->second;
    require(other != target_, "sep_score needs two distinct vertices");
    require(!sets::contains(n, other) && !sets::contains(n, target_), "sep_score: endpoints must not be in N");

    SepScore out;
    out.target = target_;
    out.other = other;
    if (n.empty()) {
        out.value = ci_.p_value(target_, other, {});
    } else {
        out.value = -1.0;
        for (std::size_t i = 0; i < n.size(); ++i) {
            const SepScore& sub = score(other, sets::without_index(n, i));
            if (better(sub.value, sub.witness, out)) {
                out.value = sub.value;
                out.witness = sub.witness;
            }
        }
        if (static_cast<int>(n.size()) <= m_ci_) {
            double p = ci_.p_value(target_, other, n);
            if (better(p, n, out)) {
                out.value = p;
                out.witness = n;
            }
        }
    }
    return memo_.emplace(std::move(key), std::move(out)).first->second;
}

SepScore sep_score(VarId x, VarId y, const VarSet& n, const CiTester& ci, int m_ci) {
    SepScorer scorer(x, ci, m_ci);
    return scorer.score(y, n);
}

QValue q_value(SepScorer& scorer, const VarSet& n, const std::vector<VarId>& vars, std::optional<double> floor) {
    QValue q;
    for (VarId m : vars) {
        if (m == scorer.target() || sets::contains(n, m))
            continue;
        double s = scorer.score(m, n).value;
        if (floor && s <= *floor) {
            q.value = s;
            q.exited_early = true;
            return q;
        }
        q.value = std::min(q.value, s);
    }
    return q;
}

NeighborSelection maximization_step(SepScorer& scorer, const NeighborhoodFamily& family,
                                    const std::vector<VarId>& vars, bool early_exit) {
    if (family.family.empty())
        throw Error(ErrorCode::EmptyFamily, "maximization step on an empty family");
    std::vector<const CandidateSet*> order;
    for (const auto& c : family.family)
        order.push_back(&c);
    std::stable_sort(order.begin(), order.end(), [](const CandidateSet* a, const CandidateSet* b) {
        if (a->members.size() != b->members.size())
            return a->members.size() < b->members.size();
        return a->members < b->members;
    });

    NeighborSelection sel;
    sel.target = scorer.target();
    sel.chosen = *order.front();
    sel.q_value = q_value(scorer, sel.chosen.members, vars).value;
    for (std::size_t i = 1; i < order.size(); ++i) {
        std::optional<double> floor;
        if (early_exit)
            floor = sel.q_value;
        QValue q = q_value(scorer, order[i]->members, vars, floor);
        if (q.value > sel.q_value) {
            sel.runner_up_q = std::max(sel.runner_up_q, sel.q_value);
            sel.q_value = q.value;
            sel.chosen = *order[i];
        } else {
            sel.runner_up_q = std::max(sel.runner_up_q, q.value);
        }
    }
    return sel;
}

NeighborSelection maximization_step(VarId x, const NeighborhoodFamily& family, const std::vector<VarId>& vars,
                                    const CiTester& ci, int m_ci, bool early_exit) {
    SepScorer scorer(x, ci, m_ci);
    return maximization_step(scorer, family, vars, early_exit);
}

} // namespace causeweave
