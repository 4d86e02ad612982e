#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace causeweave {

using VarId = int;

/// Sorted, duplicate-free set of variable ids. Kept as a plain vector so that
/// lexicographic comparison (used for every tie-break) is just operator<.
using VarSet = std::vector<VarId>;

enum class ErrorCode {
    Io,
    Usage,
    InvalidSchema,
    UnknownLevel,
    RowLengthMismatch,
    MissingColumn,
    ContinuousVariableInTable,
    PreconditionViolation,
    MixedBackendUnsupported,
    UnknownVertex,
    UninjectedQuery,
    BudgetExceeded,
    EmptyFamily,
    PriorKnowledgeCycle,
    VertexMismatch,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline void require(bool cond, const std::string& what) {
    if (!cond)
        throw Error(ErrorCode::PreconditionViolation, what);
}

namespace sets {

inline VarSet make(std::vector<VarId> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

inline bool contains(const VarSet& s, VarId v) {
    return std::binary_search(s.begin(), s.end(), v);
}

inline VarSet with(const VarSet& s, VarId v) {
    VarSet out;
    out.reserve(s.size() + 1);
    auto it = std::lower_bound(s.begin(), s.end(), v);
    out.insert(out.end(), s.begin(), it);
    if (it == s.end() || *it != v)
        out.push_back(v);
    out.insert(out.end(), it, s.end());
    return out;
}

inline VarSet without(const VarSet& s, VarId v) {
    VarSet out;
    out.reserve(s.size());
    for (VarId x : s)
        if (x != v)
            out.push_back(x);
    return out;
}

inline VarSet without_index(const VarSet& s, std::size_t i) {
    VarSet out;
    out.reserve(s.size() - 1);
    for (std::size_t j = 0; j < s.size(); ++j)
        if (j != i)
            out.push_back(s[j]);
    return out;
}

inline bool is_subset(const VarSet& a, const VarSet& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

inline bool is_proper_subset(const VarSet& a, const VarSet& b) {
    return a.size() < b.size() && is_subset(a, b);
}

inline VarSet intersect(const VarSet& a, const VarSet& b) {
    VarSet out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

/// Calls fn(subset) for every subset of `s` of exactly size k, in
/// lexicographic order of index combinations.
template <class Fn>
void for_each_subset_of_size(const VarSet& s, std::size_t k, Fn&& fn) {
    if (k > s.size())
        return;
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i)
        idx[i] = i;
    VarSet sub(k);
    while (true) {
        for (std::size_t i = 0; i < k; ++i)
            sub[i] = s[idx[i]];
        if (!fn(static_cast<const VarSet&>(sub)))
            return;
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == s.size() - k + i - 1)
            --i;
        if (i == 0)
            return;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j)
            idx[j] = idx[j - 1] + 1;
    }
}

} // namespace sets

} // namespace causeweave
