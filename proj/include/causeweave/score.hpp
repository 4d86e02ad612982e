#pragma once

#include "causeweave/dataset.hpp"
#include "causeweave/graph.hpp"

#include <string>
#include <utility>
#include <vector>

namespace causeweave {

/// Fit of one vertex given its parents, relative to the intercept-only model.
struct LocalFit {
    VarId vertex = 0;
    VarSet parents;
    double loglik_star = 0.0; // log-likelihood minus null log-likelihood, >= 0
    long df = 0;              // free parameters beyond the null model
};

struct FitReport {
    std::vector<std::string> names;
    std::vector<LocalFit> locals; // by vertex
    double loglik_star = 0.0;
    long df = 0;
    double bic = 0.0; // -2 * loglik_star + df * log(n)
    std::size_t n = 0;
};

/// Discrete response: saturated multinomial per observed parent
/// configuration, df = (levels - 1) * (observed configurations - 1);
/// continuous parents of a discrete response enter as quintile bins.
/// Continuous response: least squares on an intercept, continuous parents and
/// treatment-coded discrete parents; collinear columns are dropped and
/// df = rank - 1.
LocalFit fit_local(const Dataset& data, VarId x, const VarSet& parents);

/// A DAG in the equivalence class of `g`: directed edges kept, undirected ones
/// oriented by repeatedly removing a sink whose undirected neighbours are
/// adjacent to all its other neighbours. If no such sink exists the rest is
/// oriented along a topological order of the directed part, ties by id.
/// Throws PreconditionViolation when the directed part is cyclic.
Cpdag dag_extension(const Cpdag& g);

/// Scores the DAG extension of `g`; vertex names must match the dataset.
FitReport bic_of_graph(const Dataset& data, const Cpdag& g, int threads = 1);

std::string report_to_json(const FitReport& report, int indent = 2);

/// Plain-text comparison with one row per labelled report:
/// label, DF, Log-likelihood*, BIC.
std::string bic_table(const std::vector<std::pair<std::string, FitReport>>& rows);

} // namespace causeweave
