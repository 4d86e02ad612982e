#pragma once

#include "causeweave/types.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace causeweave {

using VertexPair = std::pair<VarId, VarId>;

inline VertexPair unordered_pair(VarId a, VarId b) {
    return a < b ? VertexPair{a, b} : VertexPair{b, a};
}

struct SepsetRecord {
    VarSet witness;
    double p_value = 0.0;
};

/// Mixed graph of directed and undirected edges over named vertices, with
/// per-edge significance and the separation sets of non-adjacent pairs.
class Cpdag {
public:
    Cpdag() = default;
    explicit Cpdag(std::vector<std::string> names);

    std::size_t vertices() const { return names_.size(); }
    const std::vector<std::string>& names() const { return names_; }
    VarId id_of(std::string_view name) const;

    bool adjacent(VarId a, VarId b) const { return mark(a, b) != Mark::None; }
    bool directed(VarId from, VarId to) const { return mark(from, to) == Mark::Out; }
    bool undirected(VarId a, VarId b) const { return mark(a, b) == Mark::Plain; }

    void add_undirected(VarId a, VarId b);
    void add_directed(VarId from, VarId to);
    /// Orients an existing edge as from -> to.
    void orient(VarId from, VarId to);
    void remove_edge(VarId a, VarId b);

    VarSet neighbors(VarId v) const;
    VarSet parents(VarId v) const;
    VarSet children(VarId v) const;
    VarSet undirected_neighbors(VarId v) const;

    /// Sorted (from, to) pairs.
    std::vector<VertexPair> directed_edges() const;
    /// Sorted (a < b) pairs.
    std::vector<VertexPair> undirected_edges() const;
    /// All adjacencies as (a < b) pairs.
    std::vector<VertexPair> skeleton() const;

    std::size_t edge_count() const;
    std::size_t directed_count() const;

    bool has_directed_path(VarId from, VarId to) const;
    bool has_directed_cycle() const;

    /// Significance keyed by (a < b).
    std::map<VertexPair, double> significance;
    /// Separation sets keyed by (a < b) for non-adjacent pairs.
    std::map<VertexPair, SepsetRecord> sepsets;

    friend bool operator==(const Cpdag& a, const Cpdag& b) {
        return a.names_ == b.names_ && a.marks_ == b.marks_;
    }

private:
    enum class Mark : std::uint8_t { None = 0, Plain = 1, Out = 2, In = 3 };

    Mark mark(VarId a, VarId b) const { return marks_[index(a, b)]; }
    std::size_t index(VarId a, VarId b) const;
    void check(VarId v) const;

    std::vector<std::string> names_;
    std::vector<Mark> marks_;
};

/// Domain knowledge applied before any data-driven orientation.
/// Lower tiers may cause higher tiers, never the reverse.
struct PriorKnowledge {
    std::map<VarId, int> tiers;
    std::set<VertexPair> forbidden; // (from, to) never produced
    std::set<VertexPair> required;  // (from, to) always produced when adjacent

    bool empty() const { return tiers.empty() && forbidden.empty() && required.empty(); }
    /// True unless from -> to is forbidden explicitly or by tiers.
    bool allows(VarId from, VarId to) const;
    /// Throws PreconditionViolation / PriorKnowledgeCycle on inconsistent input.
    void validate(std::size_t vertices) const;
};

PriorKnowledge parse_prior(std::string_view json_text, const std::vector<std::string>& names);
PriorKnowledge load_prior(const std::filesystem::path& path, const std::vector<std::string>& names);

/// Vertex tiers declared in a variable schema.
PriorKnowledge prior_from_tiers(const std::vector<std::optional<int>>& tiers);

std::string to_json(const Cpdag& g, int indent = 2);
Cpdag cpdag_from_json(std::string_view text);
std::string to_dot(const Cpdag& g);
Cpdag cpdag_from_dot(std::string_view text);
Cpdag load_graph(const std::filesystem::path& path);

/// Undirected shortest-path distance from `source` to every vertex
/// (-1 when unreachable).
std::vector<int> distances_from(const Cpdag& g, VarId source);

} // namespace causeweave
