#pragma once

#include "causeweave/citest.hpp"
#include "causeweave/forward.hpp"

#include <limits>
#include <optional>
#include <unordered_map>
#include <vector>

namespace causeweave {

/// S_N(target, other): the largest CI p-value over the subsets of N that were
/// tested, together with the subset attaining it.
struct SepScore {
    VarId target = 0;
    VarId other = 0;
    double value = 0.0;
    VarSet witness;
};

struct NeighborSelection {
    VarId target = 0;
    CandidateSet chosen;
    double q_value = 0.0;
    /// Best Q among the other candidates. With early exit this is an upper
    /// bound for abandoned candidates. -inf when the family has one member.
    double runner_up_q = -std::numeric_limits<double>::infinity();
};

/// Per-target memo of S_N(target, other) built with the recursion
/// S_N = max{ max_i S_{N without N_i}, CI(target, other | N) }, where the
/// CI term is dropped once |N| exceeds m_ci.
/// Ties keep the lexicographically smallest witness.
class SepScorer {
public:
    SepScorer(VarId target, CiTester ci, int m_ci);

    const SepScore& score(VarId other, const VarSet& n);

    VarId target() const { return target_; }
    int m_ci() const { return m_ci_; }
    std::size_t memo_size() const { return memo_.size(); }

private:
    VarId target_;
    CiTester ci_;
    int m_ci_;
    std::unordered_map<CiKey, SepScore, CiKeyHash> memo_;
};

SepScore sep_score(VarId x, VarId y, const VarSet& n, const CiTester& ci, int m_ci);

struct QValue {
    double value = std::numeric_limits<double>::infinity();
    /// True when evaluation stopped at a score <= floor; value is then that score.
    bool exited_early = false;
};

/// min over M in vars \ (N + target) of S_N(M, target); +inf for an empty
/// index set. Stops at the first score <= *floor when a floor is given.
QValue q_value(SepScorer& scorer, const VarSet& n, const std::vector<VarId>& vars,
               std::optional<double> floor = std::nullopt);

/// Picks the candidate with the largest Q. Candidates are visited in
/// (size, members) order and a later one must beat the running best strictly,
/// so ties go to the smaller, then lexicographically first, set.
/// Throws EmptyFamily for an empty family.
NeighborSelection maximization_step(SepScorer& scorer, const NeighborhoodFamily& family,
                                    const std::vector<VarId>& vars, bool early_exit = true);

NeighborSelection maximization_step(VarId x, const NeighborhoodFamily& family, const std::vector<VarId>& vars,
                                    const CiTester& ci, int m_ci, bool early_exit = true);

} // namespace causeweave
