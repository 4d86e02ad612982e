#pragma once

#include "causeweave/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace causeweave {

enum class VariableKind { Categorical, Ordinal, Continuous };

std::string_view to_string(VariableKind kind);
VariableKind parse_variable_kind(std::string_view s);

struct VariableSchema {
    std::string name;
    VariableKind kind = VariableKind::Categorical;
    std::vector<std::string> levels; // empty for continuous
    std::optional<int> tier;

    bool discrete() const { return kind != VariableKind::Continuous; }
    int level_count() const { return static_cast<int>(levels.size()); }
};

/// Throws InvalidSchema if the variable violates the schema invariants.
void validate(const VariableSchema& v);

/// Column-major table of encoded observations. Discrete cells hold level
/// indices, continuous cells hold the raw value. Immutable once built.
class Dataset {
public:
    Dataset() = default;

    /// `discrete` and `continuous` are indexed by variable; each variable uses
    /// exactly one of the two (the other entry is left empty).
    Dataset(std::vector<VariableSchema> schema,
            std::vector<std::vector<int>> discrete,
            std::vector<std::vector<double>> continuous);

    static Dataset from_discrete(std::vector<VariableSchema> schema,
                                 std::vector<std::vector<int>> columns);
    static Dataset from_continuous(std::vector<std::string> names,
                                   std::vector<std::vector<double>> columns);

    std::size_t rows() const { return n_; }
    std::size_t variables() const { return schema_.size(); }

    const std::vector<VariableSchema>& schema() const { return schema_; }
    const VariableSchema& variable(VarId v) const { return schema_.at(static_cast<std::size_t>(v)); }

    const std::vector<int>& codes(VarId v) const;
    const std::vector<double>& values(VarId v) const;

    /// Returns the id of the variable called `name`, or throws UnknownVertex.
    VarId id_of(std::string_view name) const;
    std::vector<std::string> names() const;

    /// Raw cell text as it would appear in a CSV.
    std::string cell(VarId v, std::size_t row) const;

    /// Keeps the listed variables (in the given order).
    Dataset select(const std::vector<VarId>& keep) const;

private:
    std::vector<VariableSchema> schema_;
    std::vector<std::vector<int>> discrete_;
    std::vector<std::vector<double>> continuous_;
    std::size_t n_ = 0;
};

std::vector<VariableSchema> load_schema(const std::filesystem::path& path);
std::vector<VariableSchema> parse_schema(std::string_view json_text);
std::string schema_to_json(const std::vector<VariableSchema>& schema);

/// RFC-4180 reader. The header must name exactly the schema variables (any
/// order); columns are reordered to schema order.
Dataset load_csv(const std::filesystem::path& path, const std::filesystem::path& schema_path);
Dataset parse_csv(std::string_view csv_text, std::vector<VariableSchema> schema);
std::string to_csv(const Dataset& data);

std::vector<std::vector<std::string>> parse_csv_records(std::string_view text);

/// Drops every discrete variable whose modal level frequency exceeds
/// `threshold`. Continuous variables are untouched.
Dataset filter_dominant(const Dataset& data, double threshold = 0.99);

/// Keeps the most frequent levels of each discrete variable until they cover
/// at least `coverage` of the rows and folds the remainder into one "Other"
/// level. Variables left with a single level are dropped.
Dataset cap_levels(const Dataset& data, double coverage = 0.95);

/// Dense count table over (x, y, s1, ..., sd). Axis 0 varies fastest.
struct ContingencyTable {
    std::vector<int> dims;
    std::vector<std::int64_t> counts;
    std::int64_t total = 0;

    std::size_t index(const std::vector<int>& cell) const;
    std::int64_t at(const std::vector<int>& cell) const { return counts[index(cell)]; }
};

ContingencyTable build_table(const Dataset& data, VarId x, VarId y, const VarSet& s);

} // namespace causeweave
