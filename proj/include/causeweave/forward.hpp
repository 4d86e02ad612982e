#pragma once

#include "causeweave/citest.hpp"
#include "causeweave/types.hpp"

#include <map>
#include <string>
#include <vector>

namespace causeweave {

/// A candidate parents-and-children set of the target.
struct CandidateSet {
    VarSet members;
    /// False when the set was grown past the conditioning cap, i.e. accepted
    /// through the C* intersection without the incremental tests.
    bool verified = true;

    friend bool operator==(const CandidateSet&, const CandidateSet&) = default;
};

/// Maximal candidate sets of one target, ordered by (size, members).
struct NeighborhoodFamily {
    VarId target = 0;
    std::vector<CandidateSet> family;
    double alpha = 0.05;
    int m_ci = 3;
    std::size_t expanded = 0; // number of sets whose extensions were computed
};

struct ForwardOptions {
    double alpha = 0.05;
    int m_ci = 3;
    std::size_t budget = 1'000'000;
};

struct ForwardTraceEntry {
    VarSet set;
    VarSet extensions;
};

/// Memoized computation of C_X(S), the members of L_X(S) that can join S
/// while every member stays dependent on the target given every subset of
/// the others.
///
/// Sets are handled as ids; the enumeration order T_1..T_{p-1} is `order`
/// (the target excluded) and L_X(S) holds the variables that come after the
/// last member of S in that order. Queries go through the shared CiTester.
class ForwardSearch {
public:
    ForwardSearch(VarId target, std::vector<VarId> order, CiTester ci, ForwardOptions options);

    /// C_X(S). S must not contain the target. Returns the empty set when S
    /// itself fails the dependence condition.
    const VarSet& extensions(const VarSet& s);

    /// True when S is reachable by the forward search, i.e. every member of S
    /// was accepted as an extension of the set of members preceding it.
    bool admissible(const VarSet& s);

    /// Runs the level-by-level worklist search and returns the maximal sets.
    NeighborhoodFamily run(std::vector<ForwardTraceEntry>* trace = nullptr);

    std::size_t memo_size() const { return memo_.size(); }

private:
    bool dependent(VarId v, const VarSet& given) const;
    std::size_t position(VarId v) const { return pos_[static_cast<std::size_t>(v)]; }
    /// Member of S that is last in enumeration order.
    VarId last_member(const VarSet& s) const;
    VarSet compute(const VarSet& s);

    VarId target_;
    std::vector<VarId> order_;
    std::vector<std::size_t> pos_;
    CiTester ci_;
    ForwardOptions options_;
    std::map<VarSet, VarSet> memo_;
};

/// C_X(S) for a single set (fresh memo).
VarSet candidate_extensions(VarId x, const VarSet& s, const std::vector<VarId>& order, const CiTester& ci,
                            double alpha, int m_ci);

/// Enumerates the maximal candidate sets of `x`. `vars` fixes the enumeration
/// order and must contain `x`. Throws BudgetExceeded when more than
/// options.budget sets would be expanded.
NeighborhoodFamily forward_step(VarId x, const std::vector<VarId>& vars, const CiTester& ci,
                                const ForwardOptions& options = {},
                                std::vector<ForwardTraceEntry>* trace = nullptr);

/// One JSON object per line: {"set": [...], "extensions": [...]}.
std::string trace_to_jsonl(const std::vector<ForwardTraceEntry>& trace);

/// Removes every set that is a proper subset of another one.
std::vector<VarSet> maximal_sets(std::vector<VarSet> sets);

} // namespace causeweave
