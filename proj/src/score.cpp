#include "causeweave/score.hpp"

#include "causeweave/citest.hpp"
#include "causeweave/parallel.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <unordered_map>

namespace causeweave {

namespace {

// dense configuration ids of the joint parent assignment, one per row
std::vector<int> configurations(const std::vector<const std::vector<int>*>& columns, std::size_t n, int& count) {
    std::vector<int> ids(n, 0);
    count = 1;
    for (const auto* col : columns) {
        std::unordered_map<std::int64_t, int> relabel;
        for (std::size_t r = 0; r < n; ++r) {
            std::int64_t key = static_cast<std::int64_t>(ids[r]) * (std::int64_t{1} << 32) + (*col)[r];
            auto [it, fresh] = relabel.emplace(key, static_cast<int>(relabel.size()));
            ids[r] = it->second;
        }
        count = static_cast<int>(relabel.size());
    }
    return ids;
}

LocalFit fit_discrete(const Dataset& data, VarId x, const VarSet& parents) {
    const std::size_t n = data.rows();
    const auto& y = data.codes(x);
    const int levels = data.variable(x).level_count();

    std::vector<std::vector<int>> binned;
    std::vector<const std::vector<int>*> columns;
    binned.reserve(parents.size());
    for (VarId p : parents) {
        if (data.variable(p).discrete()) {
            columns.push_back(&data.codes(p));
        } else {
            binned.push_back(quintile_codes(data.values(p)));
            columns.push_back(&binned.back());
        }
    }
    int configs = 0;
    std::vector<int> cfg = configurations(columns, n, configs);

    std::vector<double> joint(static_cast<std::size_t>(configs) * levels, 0.0);
    std::vector<double> margin(static_cast<std::size_t>(configs), 0.0);
    std::vector<double> response(static_cast<std::size_t>(levels), 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        joint[static_cast<std::size_t>(cfg[r]) * levels + y[r]] += 1.0;
        margin[static_cast<std::size_t>(cfg[r])] += 1.0;
        response[static_cast<std::size_t>(y[r])] += 1.0;
    }
    // sum n_ck log(n_ck n / (n_c n_k)): the saturated minus the null
    // log-likelihood, written with one log per cell to avoid cancellation
    double gain = 0.0;
    for (int c = 0; c < configs; ++c)
        for (int k = 0; k < levels; ++k) {
            const double nck = joint[static_cast<std::size_t>(c) * levels + k];
            if (nck > 0.0)
                gain += nck * std::log(nck * static_cast<double>(n) /
                                       (margin[static_cast<std::size_t>(c)] * response[static_cast<std::size_t>(k)]));
        }

    LocalFit fit;
    fit.vertex = x;
    fit.parents = parents;
    fit.loglik_star = std::max(0.0, gain);
    fit.df = n == 0 ? 0 : static_cast<long>(levels - 1) * (configs - 1);
    return fit;
}

LocalFit fit_continuous(const Dataset& data, VarId x, const VarSet& parents) {
    const std::size_t n = data.rows();
    const auto& yv = data.values(x);

    std::size_t cols = 1;
    for (VarId p : parents)
        cols += data.variable(p).discrete() ? static_cast<std::size_t>(data.variable(p).level_count() - 1) : 1;

    Eigen::MatrixXd design = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cols));
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
        const auto row = static_cast<Eigen::Index>(r);
        y(row) = yv[r];
        design(row, 0) = 1.0;
        Eigen::Index c = 1;
        for (VarId p : parents) {
            const auto& var = data.variable(p);
            if (var.discrete()) {
                int code = data.codes(p)[r];
                if (code > 0)
                    design(row, c + code - 1) = 1.0;
                c += var.level_count() - 1;
            } else {
                design(row, c++) = data.values(p)[r];
            }
        }
    }

    LocalFit fit;
    fit.vertex = x;
    fit.parents = parents;
    if (n == 0)
        return fit;
    const double mean = y.mean();
    const double tss = (y.array() - mean).square().sum();
    if (parents.empty() || tss <= 0.0)
        return fit;

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    // relative threshold scaled to the column norms
    qr.setThreshold(1e-10);
    const auto rank = qr.rank();
    Eigen::VectorXd beta = qr.solve(y);
    double rss = (y - design * beta).squaredNorm();
    rss = std::clamp(rss, tss * 1e-15, tss);

    fit.loglik_star = 0.5 * static_cast<double>(n) * std::log(tss / rss);
    fit.df = static_cast<long>(rank) - 1;
    return fit;
}

} // namespace

LocalFit fit_local(const Dataset& data, VarId x, const VarSet& parents) {
    require(x >= 0 && static_cast<std::size_t>(x) < data.variables(), "fit_local: vertex out of range");
    require(!sets::contains(parents, x), "fit_local: parents must exclude the vertex");
    for (VarId p : parents)
        require(p >= 0 && static_cast<std::size_t>(p) < data.variables(), "fit_local: parent out of range");
    VarSet sorted = sets::make(parents);
    return data.variable(x).discrete() ? fit_discrete(data, x, sorted) : fit_continuous(data, x, sorted);
}

Cpdag dag_extension(const Cpdag& g) {
    Cpdag dag = g;
    if (dag.has_directed_cycle())
        throw Error(ErrorCode::PreconditionViolation, "directed part of the graph is cyclic");

    const auto p = static_cast<VarId>(g.vertices());
    // `work` shrinks as sinks are removed; orientations are copied into `dag`
    Cpdag work = g;
    std::vector<bool> removed(static_cast<std::size_t>(p), false);
    std::size_t left = g.vertices();
    while (left > 0) {
        VarId sink = -1;
        for (VarId v = 0; v < p && sink < 0; ++v) {
            if (removed[static_cast<std::size_t>(v)] || !work.children(v).empty())
                continue;
            VarSet adj = work.neighbors(v);
            bool ok = true;
            for (VarId u : work.undirected_neighbors(v)) {
                for (VarId w : adj)
                    if (w != u && !work.adjacent(u, w)) {
                        ok = false;
                        break;
                    }
                if (!ok)
                    break;
            }
            if (ok)
                sink = v;
        }
        if (sink < 0)
            break;
        for (VarId u : work.undirected_neighbors(sink))
            dag.orient(u, sink);
        for (VarId u : work.neighbors(sink))
            work.remove_edge(u, sink);
        removed[static_cast<std::size_t>(sink)] = true;
        --left;
    }

    if (!dag.undirected_edges().empty()) {
        // topological order of the directed part, smallest id first
        std::vector<int> indegree(static_cast<std::size_t>(p), 0);
        for (auto [a, b] : dag.directed_edges())
            ++indegree[static_cast<std::size_t>(b)];
        std::vector<int> rank(static_cast<std::size_t>(p), 0);
        std::vector<bool> done(static_cast<std::size_t>(p), false);
        for (int step = 0; step < p; ++step) {
            VarId next = -1;
            for (VarId v = 0; v < p; ++v)
                if (!done[static_cast<std::size_t>(v)] && indegree[static_cast<std::size_t>(v)] == 0) {
                    next = v;
                    break;
                }
            done[static_cast<std::size_t>(next)] = true;
            rank[static_cast<std::size_t>(next)] = step;
            for (VarId c : dag.children(next))
                --indegree[static_cast<std::size_t>(c)];
        }
        for (auto [a, b] : dag.undirected_edges()) {
            if (rank[static_cast<std::size_t>(a)] < rank[static_cast<std::size_t>(b)])
                dag.orient(a, b);
            else
                dag.orient(b, a);
        }
    }
    return dag;
}

FitReport bic_of_graph(const Dataset& data, const Cpdag& g, int threads) {
    if (data.names() != g.names())
        throw Error(ErrorCode::VertexMismatch, "graph vertices do not match the dataset variables");
    Cpdag dag = dag_extension(g);

    FitReport report;
    report.names = g.names();
    report.n = data.rows();
    report.locals.resize(g.vertices());
    parallel_for(g.vertices(), threads, [&](std::size_t v) {
        report.locals[v] = fit_local(data, static_cast<VarId>(v), dag.parents(static_cast<VarId>(v)));
    });
    for (const auto& f : report.locals) {
        report.loglik_star += f.loglik_star;
        report.df += f.df;
    }
    const double logn = report.n > 0 ? std::log(static_cast<double>(report.n)) : 0.0;
    report.bic = -2.0 * report.loglik_star + static_cast<double>(report.df) * logn;
    return report;
}

std::string report_to_json(const FitReport& report, int indent) {
    nlohmann::ordered_json j;
    j["n"] = report.n;
    j["df"] = report.df;
    j["loglik_star"] = report.loglik_star;
    j["bic"] = report.bic;
    auto vertices = nlohmann::ordered_json::array();
    for (const auto& f : report.locals) {
        nlohmann::ordered_json v;
        v["name"] = report.names.at(static_cast<std::size_t>(f.vertex));
        auto parents = nlohmann::ordered_json::array();
        for (VarId p : f.parents)
            parents.push_back(report.names.at(static_cast<std::size_t>(p)));
        v["parents"] = std::move(parents);
        v["loglik_star"] = f.loglik_star;
        v["df"] = f.df;
        vertices.push_back(std::move(v));
    }
    j["vertices"] = std::move(vertices);
    return j.dump(indent);
}

std::string bic_table(const std::vector<std::pair<std::string, FitReport>>& rows) {
    std::size_t width = 9;
    for (const auto& [label, _] : rows)
        width = std::max(width, label.size());
    std::ostringstream out;
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-*s %8s %16s %14s\n", static_cast<int>(width), "algorithm", "DF",
                  "Log-likelihood*", "BIC");
    out << buf;
    for (const auto& [label, r] : rows) {
        std::snprintf(buf, sizeof buf, "%-*s %8ld %16.3f %14.3f\n", static_cast<int>(width), label.c_str(), r.df,
                      r.loglik_star, r.bic);
        out << buf;
    }
    return out.str();
}

} // namespace causeweave
