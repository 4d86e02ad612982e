#include "causeweave/citest.hpp"

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <json.hpp>

#include <cmath>
#include <deque>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace causeweave {

std::string_view to_string(CiBackendKind kind) {
    switch (kind) {
    case CiBackendKind::GTest: return "gtest";
    case CiBackendKind::FisherZ: return "fisherz";
    case CiBackendKind::Oracle: return "oracle";
    case CiBackendKind::Injected: return "injected";
    }
    return "gtest";
}

std::string_view to_string(DataTest t) {
    switch (t) {
    case DataTest::Auto: return "auto";
    case DataTest::GTest: return "gtest";
    case DataTest::FisherZ: return "fisherz";
    }
    return "auto";
}

DataTest parse_data_test(std::string_view s) {
    if (s == "auto")
        return DataTest::Auto;
    if (s == "gtest")
        return DataTest::GTest;
    if (s == "fisherz")
        return DataTest::FisherZ;
    throw Error(ErrorCode::Usage, "unknown test '" + std::string(s) + "'");
}

CiKey CiKey::make(VarId x, VarId y, VarSet s) {
    if (x > y)
        std::swap(x, y);
    if (!std::is_sorted(s.begin(), s.end()))
        std::sort(s.begin(), s.end());
    return CiKey{x, y, std::move(s)};
}

std::size_t CiKeyHash::operator()(const CiKey& k) const noexcept {
    std::size_t h = std::hash<int>{}(k.a) * 0x9E3779B97F4A7C15ULL ^ std::hash<int>{}(k.b);
    for (VarId v : k.s)
        h = (h ^ static_cast<std::size_t>(v + 0x51ED27)) * 0x100000001B3ULL;
    return h;
}

namespace {

void check_query(std::size_t p, VarId x, VarId y, const VarSet& s) {
    auto in_range = [p](VarId v) { return v >= 0 && static_cast<std::size_t>(v) < p; };
    if (!in_range(x) || !in_range(y))
        throw Error(ErrorCode::UnknownVertex, "CI query on unknown vertex");
    for (VarId v : s)
        if (!in_range(v))
            throw Error(ErrorCode::UnknownVertex, "CI query conditions on unknown vertex");
    require(x != y, "CI query needs x != y");
    require(!sets::contains(s, x) && !sets::contains(s, y), "CI query: x and y must not be in the conditioning set");
}

double chi2_upper(double stat, int dof) {
    if (dof <= 0 || stat <= 0.0)
        return 1.0;
    boost::math::chi_squared dist(dof);
    return boost::math::cdf(boost::math::complement(dist, stat));
}

// Shared G-test kernel over dense counts laid out x fastest, then y, then stratum.
CITestResult g_from_counts(const std::int64_t* counts, int kx, int ky, std::size_t strata) {
    CITestResult r;
    r.backend = CiBackendKind::GTest;
    double g = 0.0;
    int nonempty = 0;
    std::int64_t total = 0;
    std::vector<std::int64_t> nx(static_cast<std::size_t>(kx));
    std::vector<std::int64_t> ny(static_cast<std::size_t>(ky));
    const std::size_t cell = static_cast<std::size_t>(kx) * static_cast<std::size_t>(ky);
    for (std::size_t z = 0; z < strata; ++z) {
        const std::int64_t* c = counts + z * cell;
        std::fill(nx.begin(), nx.end(), 0);
        std::fill(ny.begin(), ny.end(), 0);
        std::int64_t nz = 0;
        for (int j = 0; j < ky; ++j)
            for (int i = 0; i < kx; ++i) {
                std::int64_t v = c[static_cast<std::size_t>(j * kx + i)];
                nx[static_cast<std::size_t>(i)] += v;
                ny[static_cast<std::size_t>(j)] += v;
                nz += v;
            }
        if (nz == 0)
            continue;
        ++nonempty;
        total += nz;
        for (int j = 0; j < ky; ++j)
            for (int i = 0; i < kx; ++i) {
                std::int64_t v = c[static_cast<std::size_t>(j * kx + i)];
                if (v == 0)
                    continue;
                g += static_cast<double>(v) *
                     std::log(static_cast<double>(v) * static_cast<double>(nz) /
                              (static_cast<double>(nx[static_cast<std::size_t>(i)]) *
                               static_cast<double>(ny[static_cast<std::size_t>(j)])));
            }
    }
    r.statistic = std::max(0.0, 2.0 * g);
    r.dof = (kx - 1) * (ky - 1) * nonempty;
    r.p_value = chi2_upper(r.statistic, r.dof);
    r.low_power = static_cast<double>(total) < 5.0 * r.dof;
    return r;
}

} // namespace

CITestResult g_test(const ContingencyTable& table) {
    require(table.dims.size() >= 2, "g_test needs at least two axes");
    std::size_t strata = 1;
    for (std::size_t a = 2; a < table.dims.size(); ++a)
        strata *= static_cast<std::size_t>(table.dims[a]);
    return g_from_counts(table.counts.data(), table.dims[0], table.dims[1], strata);
}

std::vector<int> quintile_codes(const std::vector<double>& values) {
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> out(values.size(), 0);
    if (values.empty())
        return out;
    double cuts[4];
    for (int k = 1; k <= 4; ++k)
        cuts[k - 1] = sorted[std::min(sorted.size() - 1, static_cast<std::size_t>(k) * sorted.size() / 5)];
    for (std::size_t r = 0; r < values.size(); ++r)
        out[r] = static_cast<int>(std::upper_bound(cuts, cuts + 4, values[r]) - cuts);
    return out;
}

DataCiBackend::DataCiBackend(const Dataset& data, DataTest kind) : data_(&data), kind_(kind) {
    const std::size_t p = data.variables();
    binned_.resize(p);
    corr_.assign(p, std::vector<double>(p, 0.0));
    std::vector<VarId> cont;
    for (VarId v = 0; v < static_cast<VarId>(p); ++v)
        if (!data.variable(v).discrete()) {
            cont.push_back(v);
            if (kind_ != DataTest::FisherZ)
                binned_[static_cast<std::size_t>(v)] = quintile_codes(data.values(v));
        }
    if (kind_ == DataTest::GTest || cont.empty())
        return;

    const std::size_t n = data.rows();
    std::vector<std::vector<double>> centered;
    std::vector<double> norm;
    for (VarId v : cont) {
        const auto& col = data.values(v);
        double mean = n ? std::accumulate(col.begin(), col.end(), 0.0) / static_cast<double>(n) : 0.0;
        std::vector<double> c(n);
        double ss = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            c[r] = col[r] - mean;
            ss += c[r] * c[r];
        }
        centered.push_back(std::move(c));
        norm.push_back(std::sqrt(ss));
    }
    for (std::size_t i = 0; i < cont.size(); ++i) {
        auto vi = static_cast<std::size_t>(cont[i]);
        corr_[vi][vi] = 1.0;
        for (std::size_t j = i + 1; j < cont.size(); ++j) {
            auto vj = static_cast<std::size_t>(cont[j]);
            double dot = 0.0;
            for (std::size_t r = 0; r < n; ++r)
                dot += centered[i][r] * centered[j][r];
            double denom = norm[i] * norm[j];
            double c = denom > 0.0 ? dot / denom : 0.0;
            corr_[vi][vj] = corr_[vj][vi] = c;
        }
    }
}

const std::vector<int>& DataCiBackend::codes(VarId v) const {
    if (data_->variable(v).discrete())
        return data_->codes(v);
    return binned_[static_cast<std::size_t>(v)];
}

int DataCiBackend::levels(VarId v) const {
    const auto& var = data_->variable(v);
    return var.discrete() ? var.level_count() : 5;
}

CITestResult DataCiBackend::test(VarId x, VarId y, const VarSet& s) const {
    check_query(data_->variables(), x, y, s);
    auto continuous = [&](VarId v) { return !data_->variable(v).discrete(); };
    bool all_continuous = continuous(x) && continuous(y) && std::all_of(s.begin(), s.end(), continuous);
    switch (kind_) {
    case DataTest::FisherZ:
        if (!all_continuous)
            throw Error(ErrorCode::MixedBackendUnsupported, "Fisher-z test requested on a discrete variable");
        return fisher_z(x, y, s);
    case DataTest::GTest:
        return g_test(x, y, s);
    case DataTest::Auto:
        break;
    }
    return all_continuous ? fisher_z(x, y, s) : g_test(x, y, s);
}

CITestResult DataCiBackend::g_test(VarId x, VarId y, const VarSet& s) const {
    check_query(data_->variables(), x, y, s);
    if (kind_ == DataTest::FisherZ)
        throw Error(ErrorCode::MixedBackendUnsupported, "G-test unavailable on a Fisher-z-only backend");
    const std::size_t n = data_->rows();
    const int kx = levels(x);
    const int ky = levels(y);

    std::vector<std::size_t> stratum(n, 0);
    std::size_t strata = 1;
    bool dense = true;
    for (VarId v : s) {
        const auto& c = codes(v);
        const auto k = static_cast<std::size_t>(levels(v));
        for (std::size_t r = 0; r < n; ++r)
            stratum[r] += static_cast<std::size_t>(c[r]) * strata;
        strata *= k;
        if (strata * static_cast<std::size_t>(kx * ky) > (std::size_t{1} << 22))
            dense = false;
    }
    if (!dense) {
        // relabel observed strata densely; empty strata contribute nothing anyway
        std::unordered_map<std::size_t, std::size_t> relabel;
        for (auto& z : stratum)
            z = relabel.emplace(z, relabel.size()).first->second;
        strata = relabel.size();
    }

    const std::size_t cell = static_cast<std::size_t>(kx * ky);
    std::vector<std::int64_t> counts(cell * strata, 0);
    const auto& cx = codes(x);
    const auto& cy = codes(y);
    for (std::size_t r = 0; r < n; ++r)
        ++counts[stratum[r] * cell + static_cast<std::size_t>(cy[r] * kx + cx[r])];
    return g_from_counts(counts.data(), kx, ky, strata);
}

CITestResult DataCiBackend::fisher_z(VarId x, VarId y, const VarSet& s) const {
    check_query(data_->variables(), x, y, s);
    if (kind_ == DataTest::GTest)
        throw Error(ErrorCode::MixedBackendUnsupported, "Fisher-z test unavailable on a G-test-only backend");
    std::vector<VarId> vars{x, y};
    vars.insert(vars.end(), s.begin(), s.end());
    for (VarId v : vars)
        if (data_->variable(v).discrete())
            throw Error(ErrorCode::MixedBackendUnsupported, "Fisher-z test on discrete '" + data_->variable(v).name + "'");

    const auto k = static_cast<Eigen::Index>(vars.size());
    Eigen::MatrixXd sub(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < k; ++j)
            sub(i, j) = corr_[static_cast<std::size_t>(vars[static_cast<std::size_t>(i)])]
                             [static_cast<std::size_t>(vars[static_cast<std::size_t>(j)])];

    double r = sub(0, 1);
    if (!s.empty()) {
        Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
        Eigen::MatrixXd prec = lu.isInvertible() ? Eigen::MatrixXd(lu.inverse())
                                                 : Eigen::MatrixXd(sub.completeOrthogonalDecomposition().pseudoInverse());
        double denom = std::sqrt(prec(0, 0) * prec(1, 1));
        r = denom > 0.0 ? -prec(0, 1) / denom : 0.0;
    }
    r = std::clamp(r, -1.0 + 1e-12, 1.0 - 1e-12);

    CITestResult res;
    res.backend = CiBackendKind::FisherZ;
    const long dof = static_cast<long>(data_->rows()) - static_cast<long>(s.size()) - 3;
    res.dof = static_cast<int>(std::max(0L, dof));
    if (dof <= 0) {
        res.low_power = true;
        return res;
    }
    double z = 0.5 * std::log1p(2.0 * r / (1.0 - r)) * std::sqrt(static_cast<double>(dof));
    res.statistic = z;
    boost::math::normal std_normal;
    res.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(std_normal, std::abs(z))));
    return res;
}

CITestResult ci_test(const Dataset& data, VarId x, VarId y, const VarSet& s, DataTest kind) {
    return DataCiBackend(data, kind).test(x, y, s);
}

// ---------------------------------------------------------------------------

OracleGraph::OracleGraph(std::size_t vertices, const std::vector<std::pair<VarId, VarId>>& edges)
    : parents_(vertices), children_(vertices) {
    for (auto [a, b] : edges) {
        if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= vertices || static_cast<std::size_t>(b) >= vertices)
            throw Error(ErrorCode::UnknownVertex, "edge references an unknown vertex");
        require(a != b, "self loops are not allowed");
        parents_[static_cast<std::size_t>(b)].push_back(a);
        children_[static_cast<std::size_t>(a)].push_back(b);
    }
    for (auto& p : parents_)
        p = sets::make(std::move(p));
    for (auto& c : children_)
        c = sets::make(std::move(c));

    // Kahn's algorithm, smallest ready id first
    std::vector<std::size_t> indeg(vertices);
    for (std::size_t v = 0; v < vertices; ++v)
        indeg[v] = parents_[v].size();
    std::vector<VarId> ready;
    for (std::size_t v = 0; v < vertices; ++v)
        if (indeg[v] == 0)
            ready.push_back(static_cast<VarId>(v));
    while (!ready.empty()) {
        auto it = std::min_element(ready.begin(), ready.end());
        VarId v = *it;
        ready.erase(it);
        topo_.push_back(v);
        for (VarId c : children_[static_cast<std::size_t>(v)])
            if (--indeg[static_cast<std::size_t>(c)] == 0)
                ready.push_back(c);
    }
    require(topo_.size() == vertices, "oracle graph contains a directed cycle");
}

bool OracleGraph::has_edge(VarId from, VarId to) const {
    return sets::contains(children_.at(static_cast<std::size_t>(from)), to);
}

std::vector<std::pair<VarId, VarId>> OracleGraph::edges() const {
    std::vector<std::pair<VarId, VarId>> out;
    for (std::size_t a = 0; a < children_.size(); ++a)
        for (VarId b : children_[a])
            out.emplace_back(static_cast<VarId>(a), b);
    return out;
}

OracleGraph OracleGraph::permuted(const std::vector<VarId>& perm) const {
    require(perm.size() == vertices(), "permutation size mismatch");
    std::vector<std::pair<VarId, VarId>> e;
    for (auto [a, b] : edges())
        e.emplace_back(perm[static_cast<std::size_t>(a)], perm[static_cast<std::size_t>(b)]);
    return OracleGraph(vertices(), e);
}

bool d_sep(const OracleGraph& g, VarId x, VarId y, const VarSet& s) {
    check_query(g.vertices(), x, y, s);
    const std::size_t p = g.vertices();

    // ancestors of s (inclusive)
    std::vector<char> in_s(p, 0), anc(p, 0);
    std::vector<VarId> stack;
    for (VarId v : s) {
        in_s[static_cast<std::size_t>(v)] = 1;
        stack.push_back(v);
    }
    while (!stack.empty()) {
        VarId v = stack.back();
        stack.pop_back();
        if (anc[static_cast<std::size_t>(v)])
            continue;
        anc[static_cast<std::size_t>(v)] = 1;
        for (VarId u : g.parents(v))
            stack.push_back(u);
    }

    // states: (v, arrived from a child = up) / (v, arrived from a parent = down)
    enum : int { Up = 0, Down = 1 };
    std::vector<char> visited(2 * p, 0);
    std::deque<std::pair<VarId, int>> queue{{x, Up}};
    while (!queue.empty()) {
        auto [v, dir] = queue.front();
        queue.pop_front();
        auto slot = 2 * static_cast<std::size_t>(v) + static_cast<std::size_t>(dir);
        if (visited[slot])
            continue;
        visited[slot] = 1;
        const bool blocked = in_s[static_cast<std::size_t>(v)];
        if (!blocked && v == y)
            return false;
        if (dir == Up && !blocked) {
            for (VarId u : g.parents(v))
                queue.emplace_back(u, Up);
            for (VarId c : g.children(v))
                queue.emplace_back(c, Down);
        } else if (dir == Down) {
            if (!blocked)
                for (VarId c : g.children(v))
                    queue.emplace_back(c, Down);
            if (anc[static_cast<std::size_t>(v)])
                for (VarId u : g.parents(v))
                    queue.emplace_back(u, Up);
        }
    }
    return true;
}

CITestResult oracle_ci(const OracleGraph& g, VarId x, VarId y, const VarSet& s) {
    CITestResult r;
    r.backend = CiBackendKind::Oracle;
    bool sep = d_sep(g, x, y, s);
    r.p_value = sep ? 1.0 : 0.0;
    r.statistic = sep ? 0.0 : 1.0;
    return r;
}

// ---------------------------------------------------------------------------

InjectedBackend::InjectedBackend(const std::vector<InjectedEntry>& table, std::size_t variables)
    : variables_(variables) {
    for (const auto& e : table) {
        VarSet s = sets::make(e.s);
        check_query(variables, e.x, e.y, s);
        require(e.p >= 0.0 && e.p <= 1.0, "injected p-value outside [0,1]");
        if (!table_.emplace(CiKey::make(e.x, e.y, std::move(s)), e.p).second)
            throw Error(ErrorCode::PreconditionViolation, "duplicate injected query");
    }
}

CITestResult InjectedBackend::test(VarId x, VarId y, const VarSet& s) const {
    check_query(variables_, x, y, s);
    auto it = table_.find(CiKey::make(x, y, s));
    if (it == table_.end()) {
        std::ostringstream os;
        os << "no injected result for (" << x << ", " << y << " | {";
        for (std::size_t i = 0; i < s.size(); ++i)
            os << (i ? "," : "") << s[i];
        os << "})";
        throw Error(ErrorCode::UninjectedQuery, os.str());
    }
    CITestResult r;
    r.backend = CiBackendKind::Injected;
    r.p_value = it->second;
    return r;
}

InjectedBackend inject_results(const std::vector<InjectedEntry>& table, std::size_t variables) {
    return InjectedBackend(table, variables);
}

std::vector<InjectedEntry> parse_injected(std::string_view json_text, std::vector<std::string>& names) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Io, std::string("injected-results file is not valid JSON: ") + e.what());
    }
    if (!doc.is_array())
        throw Error(ErrorCode::Io, "injected-results file must be a JSON array");
    auto resolve = [&](const nlohmann::json& j) -> VarId {
        if (j.is_number_integer())
            return j.get<VarId>();
        if (!j.is_string())
            throw Error(ErrorCode::Io, "variable ids must be integers or names");
        auto name = j.get<std::string>();
        auto it = std::find(names.begin(), names.end(), name);
        if (it != names.end())
            return static_cast<VarId>(it - names.begin());
        names.push_back(name);
        return static_cast<VarId>(names.size() - 1);
    };
    std::vector<InjectedEntry> out;
    try {
        for (const auto& item : doc) {
            InjectedEntry e;
            e.x = resolve(item.at("x"));
            e.y = resolve(item.at("y"));
            if (item.contains("s"))
                for (const auto& v : item.at("s"))
                    e.s.push_back(resolve(v));
            e.s = sets::make(std::move(e.s));
            e.p = item.at("p").get<double>();
            out.push_back(std::move(e));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Io, std::string("malformed injected entry: ") + e.what());
    }
    return out;
}

std::vector<InjectedEntry> load_injected(const std::filesystem::path& path, std::vector<std::string>& names) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_injected(ss.str(), names);
}

// ---------------------------------------------------------------------------

std::optional<CITestResult> CICache::find(const CiKey& key) const {
    std::shared_lock lock(mutex_);
    auto it = map_.find(key);
    if (it == map_.end())
        return std::nullopt;
    ++hits_;
    return it->second;
}

void CICache::store(const CiKey& key, const CITestResult& result) {
    std::unique_lock lock(mutex_);
    auto [it, inserted] = map_.insert_or_assign(key, result);
    (void)it;
    if (inserted) {
        ++misses_;
        if (result.low_power)
            ++low_power_;
    }
}

std::size_t CICache::size() const {
    std::shared_lock lock(mutex_);
    return map_.size();
}

void QueryLog::record(const CiKey& key) {
    std::lock_guard lock(mutex_);
    keys_.push_back(key);
}

std::vector<CiKey> QueryLog::keys() const {
    std::lock_guard lock(mutex_);
    return keys_;
}

std::size_t QueryLog::size() const {
    std::lock_guard lock(mutex_);
    return keys_.size();
}

std::size_t QueryLog::repeats() const {
    std::lock_guard lock(mutex_);
    std::unordered_set<CiKey, CiKeyHash> seen;
    std::size_t rep = 0;
    for (const auto& k : keys_)
        if (!seen.insert(k).second)
            ++rep;
    return rep;
}

void QueryLog::clear() {
    std::lock_guard lock(mutex_);
    keys_.clear();
}

CITestResult CiTester::operator()(VarId x, VarId y, const VarSet& s) const {
    CiKey key = CiKey::make(x, y, s);
    if (log_)
        log_->record(key);
    if (auto hit = cache_->find(key))
        return *hit;
    CITestResult r = backend_->test(x, y, s);
    cache_->store(key, r);
    return r;
}

} // namespace causeweave
