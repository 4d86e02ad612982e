#pragma once

#include "causeweave/dataset.hpp"
#include "causeweave/types.hpp"

#include <atomic>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <unordered_map>
#include <utility>
#include <vector>

namespace causeweave {

enum class CiBackendKind { GTest, FisherZ, Oracle, Injected };

std::string_view to_string(CiBackendKind kind);

struct CITestResult {
    double p_value = 1.0;
    double statistic = 0.0;
    int dof = 0;
    CiBackendKind backend = CiBackendKind::GTest;
    /// Set when n < 5 * dof for a G-test (or too few rows for Fisher-z).
    bool low_power = false;
};

/// Canonical query key: unordered pair {a < b} plus a sorted conditioning set.
struct CiKey {
    VarId a = 0;
    VarId b = 0;
    VarSet s;

    static CiKey make(VarId x, VarId y, VarSet s);

    friend bool operator==(const CiKey&, const CiKey&) = default;
    friend auto operator<=>(const CiKey&, const CiKey&) = default;
};

struct CiKeyHash {
    std::size_t operator()(const CiKey& k) const noexcept;
};

/// Anything that can answer CI(x, y | s) with a p-value.
class CiBackend {
public:
    virtual ~CiBackend() = default;
    virtual CITestResult test(VarId x, VarId y, const VarSet& s) const = 0;
    virtual std::size_t variables() const = 0;
};

// ---------------------------------------------------------------------------
// statistical tests on data

enum class DataTest {
    Auto,    // Fisher-z when x, y and s are all continuous, G-test otherwise
    GTest,   // G-test everywhere, continuous variables binned into quintiles
    FisherZ, // Fisher-z only; any discrete variable is an error
};

std::string_view to_string(DataTest t);
DataTest parse_data_test(std::string_view s);

/// G statistic 2 * sum n_xyz log(n_xyz n_z / (n_xz n_yz)) with
/// dof = (|X|-1)(|Y|-1) * (number of non-empty strata).
CITestResult g_test(const ContingencyTable& table);

/// Quintile bin codes (0..4) of a continuous column.
std::vector<int> quintile_codes(const std::vector<double>& values);

class DataCiBackend final : public CiBackend {
public:
    DataCiBackend(const Dataset& data, DataTest kind = DataTest::Auto);

    CITestResult test(VarId x, VarId y, const VarSet& s) const override;
    std::size_t variables() const override { return data_->variables(); }

    CITestResult g_test(VarId x, VarId y, const VarSet& s) const;
    CITestResult fisher_z(VarId x, VarId y, const VarSet& s) const;

    const Dataset& data() const { return *data_; }

private:
    const std::vector<int>& codes(VarId v) const;
    int levels(VarId v) const;

    const Dataset* data_;
    DataTest kind_;
    std::vector<std::vector<int>> binned_;  // quintile codes for continuous columns
    std::vector<std::vector<double>> corr_; // correlation among continuous columns
};

/// One-shot test without a backend object.
CITestResult ci_test(const Dataset& data, VarId x, VarId y, const VarSet& s, DataTest kind = DataTest::Auto);

// ---------------------------------------------------------------------------
// d-separation oracle

class OracleGraph {
public:
    OracleGraph() = default;
    /// Throws PreconditionViolation if the edges contain a directed cycle.
    OracleGraph(std::size_t vertices, const std::vector<std::pair<VarId, VarId>>& edges);

    std::size_t vertices() const { return parents_.size(); }
    const VarSet& parents(VarId v) const { return parents_.at(static_cast<std::size_t>(v)); }
    const VarSet& children(VarId v) const { return children_.at(static_cast<std::size_t>(v)); }
    bool has_edge(VarId from, VarId to) const;
    bool adjacent(VarId a, VarId b) const { return has_edge(a, b) || has_edge(b, a); }
    std::vector<std::pair<VarId, VarId>> edges() const;
    const std::vector<VarId>& topological_order() const { return topo_; }

    /// Same graph with vertex v renamed to perm[v].
    OracleGraph permuted(const std::vector<VarId>& perm) const;

private:
    std::vector<VarSet> parents_;
    std::vector<VarSet> children_;
    std::vector<VarId> topo_;
};

/// Exact d-separation by reachability over (vertex, direction) states.
bool d_sep(const OracleGraph& g, VarId x, VarId y, const VarSet& s);

/// p = 1 if d-separated, 0 otherwise.
CITestResult oracle_ci(const OracleGraph& g, VarId x, VarId y, const VarSet& s);

class OracleBackend final : public CiBackend {
public:
    explicit OracleBackend(OracleGraph g) : g_(std::move(g)) {}
    CITestResult test(VarId x, VarId y, const VarSet& s) const override { return oracle_ci(g_, x, y, s); }
    std::size_t variables() const override { return g_.vertices(); }
    const OracleGraph& graph() const { return g_; }

private:
    OracleGraph g_;
};

// ---------------------------------------------------------------------------
// injected p-values

struct InjectedEntry {
    VarId x = 0;
    VarId y = 0;
    VarSet s;
    double p = 1.0;
};

class InjectedBackend final : public CiBackend {
public:
    /// Throws PreconditionViolation on duplicate canonical keys or p outside [0,1].
    InjectedBackend(const std::vector<InjectedEntry>& table, std::size_t variables);

    /// Throws UninjectedQuery for keys not in the table.
    CITestResult test(VarId x, VarId y, const VarSet& s) const override;
    std::size_t variables() const override { return variables_; }
    std::size_t size() const { return table_.size(); }

private:
    std::unordered_map<CiKey, double, CiKeyHash> table_;
    std::size_t variables_;
};

InjectedBackend inject_results(const std::vector<InjectedEntry>& table, std::size_t variables);

/// Parses a JSON array of {x, y, s: [...], p}. Ids may be integers or names;
/// names are resolved against `names`, which is extended in order of first
/// appearance when a name is not yet known.
std::vector<InjectedEntry> parse_injected(std::string_view json_text, std::vector<std::string>& names);
std::vector<InjectedEntry> load_injected(const std::filesystem::path& path, std::vector<std::string>& names);

// ---------------------------------------------------------------------------
// memoization

/// Concurrent memo of test results keyed by CiKey. Identical keys always carry
/// identical results, so concurrent stores of the same key are harmless.
class CICache {
public:
    std::optional<CITestResult> find(const CiKey& key) const;
    void store(const CiKey& key, const CITestResult& result);

    std::size_t hits() const { return hits_.load(); }
    std::size_t misses() const { return misses_.load(); }
    std::size_t low_power() const { return low_power_.load(); }
    std::size_t size() const;

private:
    mutable std::shared_mutex mutex_;
    std::unordered_map<CiKey, CITestResult, CiKeyHash> map_;
    mutable std::atomic<std::size_t> hits_{0};
    std::atomic<std::size_t> misses_{0};
    std::atomic<std::size_t> low_power_{0};
};

/// Collects every canonical key requested through a CiTester.
class QueryLog {
public:
    void record(const CiKey& key);
    std::vector<CiKey> keys() const;
    std::size_t size() const;
    /// Number of requests whose key had already been requested before.
    std::size_t repeats() const;
    void clear();

private:
    mutable std::mutex mutex_;
    std::vector<CiKey> keys_;
};

/// Front end used by the search algorithms: backend + shared cache, with an
/// optional query log. Cheap to copy.
class CiTester {
public:
    CiTester(const CiBackend& backend, CICache& cache, QueryLog* log = nullptr)
        : backend_(&backend), cache_(&cache), log_(log) {}

    CITestResult operator()(VarId x, VarId y, const VarSet& s) const;
    double p_value(VarId x, VarId y, const VarSet& s) const { return (*this)(x, y, s).p_value; }

    CiTester with_log(QueryLog* log) const { return CiTester(*backend_, *cache_, log); }

    std::size_t variables() const { return backend_->variables(); }
    const CICache& cache() const { return *cache_; }
    const CiBackend& backend() const { return *backend_; }

private:
    const CiBackend* backend_;
    CICache* cache_;
    QueryLog* log_;
};

} // namespace causeweave
