#include "causeweave/dataset.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace causeweave {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::Io: return "Io";
    case ErrorCode::Usage: return "Usage";
    case ErrorCode::InvalidSchema: return "InvalidSchema";
    case ErrorCode::UnknownLevel: return "UnknownLevel";
    case ErrorCode::RowLengthMismatch: return "RowLengthMismatch";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::ContinuousVariableInTable: return "ContinuousVariableInTable";
    case ErrorCode::PreconditionViolation: return "PreconditionViolation";
    case ErrorCode::MixedBackendUnsupported: return "MixedBackendUnsupported";
    case ErrorCode::UnknownVertex: return "UnknownVertex";
    case ErrorCode::UninjectedQuery: return "UninjectedQuery";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::EmptyFamily: return "EmptyFamily";
    case ErrorCode::PriorKnowledgeCycle: return "PriorKnowledgeCycle";
    case ErrorCode::VertexMismatch: return "VertexMismatch";
    }
    return "Unknown";
}

std::string_view to_string(VariableKind kind) {
    switch (kind) {
    case VariableKind::Categorical: return "categorical";
    case VariableKind::Ordinal: return "ordinal";
    case VariableKind::Continuous: return "continuous";
    }
    return "categorical";
}

VariableKind parse_variable_kind(std::string_view s) {
    if (s == "categorical")
        return VariableKind::Categorical;
    if (s == "ordinal")
        return VariableKind::Ordinal;
    if (s == "continuous")
        return VariableKind::Continuous;
    throw Error(ErrorCode::InvalidSchema, "unknown variable kind '" + std::string(s) + "'");
}

void validate(const VariableSchema& v) {
    if (v.name.empty())
        throw Error(ErrorCode::InvalidSchema, "variable with empty name");
    if (v.discrete()) {
        if (v.levels.size() < 2)
            throw Error(ErrorCode::InvalidSchema, "discrete variable '" + v.name + "' needs at least 2 levels");
        std::unordered_set<std::string> seen;
        for (const auto& l : v.levels)
            if (!seen.insert(l).second)
                throw Error(ErrorCode::InvalidSchema, "duplicate level '" + l + "' in '" + v.name + "'");
    } else if (!v.levels.empty()) {
        throw Error(ErrorCode::InvalidSchema, "continuous variable '" + v.name + "' must not declare levels");
    }
    if (v.tier && *v.tier < 0)
        throw Error(ErrorCode::InvalidSchema, "negative tier for '" + v.name + "'");
}

Dataset::Dataset(std::vector<VariableSchema> schema,
                 std::vector<std::vector<int>> discrete,
                 std::vector<std::vector<double>> continuous)
    : schema_(std::move(schema)), discrete_(std::move(discrete)), continuous_(std::move(continuous)) {
    discrete_.resize(schema_.size());
    continuous_.resize(schema_.size());
    std::unordered_set<std::string> names;
    bool first = true;
    for (std::size_t v = 0; v < schema_.size(); ++v) {
        const auto& var = schema_[v];
        validate(var);
        if (!names.insert(var.name).second)
            throw Error(ErrorCode::InvalidSchema, "duplicate variable name '" + var.name + "'");
        std::size_t len = var.discrete() ? discrete_[v].size() : continuous_[v].size();
        if (first) {
            n_ = len;
            first = false;
        } else if (len != n_) {
            throw Error(ErrorCode::RowLengthMismatch, "column '" + var.name + "' has " + std::to_string(len) +
                                                           " entries, expected " + std::to_string(n_));
        }
        if (var.discrete()) {
            for (int c : discrete_[v])
                if (c < 0 || c >= var.level_count())
                    throw Error(ErrorCode::UnknownLevel, "level index out of range in '" + var.name + "'");
            continuous_[v].clear();
        } else {
            discrete_[v].clear();
        }
    }
}

Dataset Dataset::from_discrete(std::vector<VariableSchema> schema, std::vector<std::vector<int>> columns) {
    return Dataset(std::move(schema), std::move(columns), {});
}

Dataset Dataset::from_continuous(std::vector<std::string> names, std::vector<std::vector<double>> columns) {
    std::vector<VariableSchema> schema;
    for (auto& n : names)
        schema.push_back({std::move(n), VariableKind::Continuous, {}, std::nullopt});
    return Dataset(std::move(schema), {}, std::move(columns));
}

const std::vector<int>& Dataset::codes(VarId v) const {
    if (!variable(v).discrete())
        throw Error(ErrorCode::ContinuousVariableInTable, "variable '" + variable(v).name + "' is continuous");
    return discrete_[static_cast<std::size_t>(v)];
}

const std::vector<double>& Dataset::values(VarId v) const {
    if (variable(v).discrete())
        throw Error(ErrorCode::PreconditionViolation, "variable '" + variable(v).name + "' is discrete");
    return continuous_[static_cast<std::size_t>(v)];
}

VarId Dataset::id_of(std::string_view name) const {
    for (std::size_t v = 0; v < schema_.size(); ++v)
        if (schema_[v].name == name)
            return static_cast<VarId>(v);
    throw Error(ErrorCode::UnknownVertex, "unknown variable '" + std::string(name) + "'");
}

std::vector<std::string> Dataset::names() const {
    std::vector<std::string> out;
    for (const auto& v : schema_)
        out.push_back(v.name);
    return out;
}

std::string Dataset::cell(VarId v, std::size_t row) const {
    const auto& var = variable(v);
    if (var.discrete())
        return var.levels[static_cast<std::size_t>(discrete_[static_cast<std::size_t>(v)][row])];
    std::ostringstream os;
    os << std::setprecision(17) << continuous_[static_cast<std::size_t>(v)][row];
    return os.str();
}

Dataset Dataset::select(const std::vector<VarId>& keep) const {
    std::vector<VariableSchema> schema;
    std::vector<std::vector<int>> disc;
    std::vector<std::vector<double>> cont;
    for (VarId v : keep) {
        schema.push_back(variable(v));
        disc.push_back(discrete_[static_cast<std::size_t>(v)]);
        cont.push_back(continuous_[static_cast<std::size_t>(v)]);
    }
    Dataset out(std::move(schema), std::move(disc), std::move(cont));
    if (keep.empty())
        out.n_ = n_;
    return out;
}

// ---------------------------------------------------------------------------
// schema / csv

std::vector<VariableSchema> parse_schema(std::string_view json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidSchema, std::string("schema is not valid JSON: ") + e.what());
    }
    if (!doc.is_array())
        throw Error(ErrorCode::InvalidSchema, "schema must be a JSON array");
    std::vector<VariableSchema> out;
    try {
        for (const auto& item : doc) {
            VariableSchema v;
            v.name = item.at("name").get<std::string>();
            v.kind = parse_variable_kind(item.at("kind").get<std::string>());
            if (item.contains("levels"))
                v.levels = item.at("levels").get<std::vector<std::string>>();
            if (item.contains("tier") && !item.at("tier").is_null())
                v.tier = item.at("tier").get<int>();
            validate(v);
            out.push_back(std::move(v));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidSchema, std::string("malformed schema entry: ") + e.what());
    }
    std::unordered_set<std::string> names;
    for (const auto& v : out)
        if (!names.insert(v.name).second)
            throw Error(ErrorCode::InvalidSchema, "duplicate variable name '" + v.name + "'");
    return out;
}

std::string schema_to_json(const std::vector<VariableSchema>& schema) {
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& v : schema) {
        nlohmann::json item{{"name", v.name}, {"kind", std::string(to_string(v.kind))}};
        if (v.discrete())
            item["levels"] = v.levels;
        if (v.tier)
            item["tier"] = *v.tier;
        doc.push_back(std::move(item));
    }
    return doc.dump(2);
}

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

std::vector<VariableSchema> load_schema(const std::filesystem::path& path) {
    return parse_schema(read_file(path));
}

std::vector<std::vector<std::string>> parse_csv_records(std::string_view text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        if (!(record.size() == 1 && record[0].empty()))
            records.push_back(std::move(record));
        record.clear();
    };
    std::size_t i = 0;
    if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF")
        i = 3;
    for (; i < text.size(); ++i) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
        case '"':
            if (!field_started && field.empty())
                in_quotes = true;
            else
                field.push_back(c);
            field_started = true;
            break;
        case ',':
            end_field();
            break;
        case '\r':
            if (i + 1 < text.size() && text[i + 1] == '\n')
                ++i;
            end_record();
            break;
        case '\n':
            end_record();
            break;
        default:
            field.push_back(c);
            field_started = true;
        }
    }
    if (in_quotes)
        throw Error(ErrorCode::Io, "unterminated quoted CSV field");
    if (field_started || !field.empty() || !record.empty())
        end_record();
    return records;
}

Dataset parse_csv(std::string_view csv_text, std::vector<VariableSchema> schema) {
    auto records = parse_csv_records(csv_text);
    if (records.empty())
        throw Error(ErrorCode::Io, "CSV has no header row");
    const auto& header = records.front();

    std::unordered_map<std::string, std::size_t> column_of;
    for (std::size_t c = 0; c < header.size(); ++c)
        if (!column_of.emplace(header[c], c).second)
            throw Error(ErrorCode::InvalidSchema, "duplicate CSV column '" + header[c] + "'");
    for (const auto& v : schema)
        if (!column_of.count(v.name))
            throw Error(ErrorCode::MissingColumn, "CSV has no column '" + v.name + "'");
    if (header.size() != schema.size()) {
        for (const auto& h : header) {
            bool known = std::any_of(schema.begin(), schema.end(), [&](const auto& v) { return v.name == h; });
            if (!known)
                throw Error(ErrorCode::MissingColumn, "CSV column '" + h + "' is not in the schema");
        }
    }

    const std::size_t n = records.size() - 1;
    std::vector<std::vector<int>> disc(schema.size());
    std::vector<std::vector<double>> cont(schema.size());
    std::vector<std::unordered_map<std::string, int>> level_index(schema.size());
    for (std::size_t v = 0; v < schema.size(); ++v) {
        for (std::size_t l = 0; l < schema[v].levels.size(); ++l)
            level_index[v].emplace(schema[v].levels[l], static_cast<int>(l));
        if (schema[v].discrete())
            disc[v].reserve(n);
        else
            cont[v].reserve(n);
    }

    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.size() != header.size())
            throw Error(ErrorCode::RowLengthMismatch, "row " + std::to_string(r) + " has " +
                                                          std::to_string(rec.size()) + " fields, header has " +
                                                          std::to_string(header.size()));
        for (std::size_t v = 0; v < schema.size(); ++v) {
            const std::string& raw = rec[column_of[schema[v].name]];
            if (schema[v].discrete()) {
                auto it = level_index[v].find(raw);
                if (it == level_index[v].end())
                    throw Error(ErrorCode::UnknownLevel, "value '" + raw + "' is not a level of '" +
                                                             schema[v].name + "' (row " + std::to_string(r) + ")");
                disc[v].push_back(it->second);
            } else {
                double value = 0.0;
                auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), value);
                if (ec != std::errc() || ptr != raw.data() + raw.size())
                    throw Error(ErrorCode::UnknownLevel, "value '" + raw + "' of '" + schema[v].name +
                                                             "' is not a number (row " + std::to_string(r) + ")");
                cont[v].push_back(value);
            }
        }
    }
    return Dataset(std::move(schema), std::move(disc), std::move(cont));
}

Dataset load_csv(const std::filesystem::path& path, const std::filesystem::path& schema_path) {
    return parse_csv(read_file(path), load_schema(schema_path));
}

namespace {

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += "\"\"";
        else
            out.push_back(c);
    }
    out.push_back('"');
    return out;
}

} // namespace

std::string to_csv(const Dataset& data) {
    std::string out;
    const auto p = static_cast<VarId>(data.variables());
    for (VarId v = 0; v < p; ++v) {
        if (v)
            out.push_back(',');
        out += csv_escape(data.variable(v).name);
    }
    out.push_back('\n');
    for (std::size_t r = 0; r < data.rows(); ++r) {
        for (VarId v = 0; v < p; ++v) {
            if (v)
                out.push_back(',');
            out += csv_escape(data.cell(v, r));
        }
        out.push_back('\n');
    }
    return out;
}

// ---------------------------------------------------------------------------
// preprocessing

Dataset filter_dominant(const Dataset& data, double threshold) {
    require(threshold > 0.0 && threshold < 1.0, "dominant-level threshold must lie in (0,1)");
    std::vector<VarId> keep;
    const double n = static_cast<double>(data.rows());
    for (VarId v = 0; v < static_cast<VarId>(data.variables()); ++v) {
        const auto& var = data.variable(v);
        if (!var.discrete() || data.rows() == 0) {
            keep.push_back(v);
            continue;
        }
        std::vector<std::size_t> freq(var.levels.size(), 0);
        for (int c : data.codes(v))
            ++freq[static_cast<std::size_t>(c)];
        double modal = static_cast<double>(*std::max_element(freq.begin(), freq.end())) / n;
        if (modal <= threshold)
            keep.push_back(v);
    }
    return data.select(keep);
}

Dataset cap_levels(const Dataset& data, double coverage) {
    require(coverage > 0.0 && coverage <= 1.0, "level coverage must lie in (0,1]");
    std::vector<VariableSchema> schema;
    std::vector<std::vector<int>> disc;
    std::vector<std::vector<double>> cont;
    const double n = static_cast<double>(data.rows());
    for (VarId v = 0; v < static_cast<VarId>(data.variables()); ++v) {
        const auto& var = data.variable(v);
        if (!var.discrete()) {
            schema.push_back(var);
            disc.emplace_back();
            cont.push_back(data.values(v));
            continue;
        }
        const auto& codes = data.codes(v);
        std::vector<std::size_t> freq(var.levels.size(), 0);
        for (int c : codes)
            ++freq[static_cast<std::size_t>(c)];
        std::vector<int> order(var.levels.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return freq[a] > freq[b]; });

        std::size_t covered = 0;
        std::size_t kept = 0;
        while (kept < order.size() && static_cast<double>(covered) < coverage * n) {
            covered += freq[static_cast<std::size_t>(order[kept])];
            ++kept;
        }
        if (kept >= order.size() - 1) {
            // nothing (or a single level) left to fold
            schema.push_back(var);
            disc.push_back(codes);
            cont.emplace_back();
            continue;
        }
        std::vector<int> kept_levels(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(kept));
        std::sort(kept_levels.begin(), kept_levels.end());
        std::vector<int> remap(var.levels.size(), static_cast<int>(kept_levels.size()));
        VariableSchema capped = var;
        capped.levels.clear();
        for (std::size_t i = 0; i < kept_levels.size(); ++i) {
            remap[static_cast<std::size_t>(kept_levels[i])] = static_cast<int>(i);
            capped.levels.push_back(var.levels[static_cast<std::size_t>(kept_levels[i])]);
        }
        std::string other = "Other";
        while (std::find(capped.levels.begin(), capped.levels.end(), other) != capped.levels.end())
            other += "_";
        capped.levels.push_back(other);
        if (capped.levels.size() < 2)
            continue;
        std::vector<int> recoded(codes.size());
        for (std::size_t r = 0; r < codes.size(); ++r)
            recoded[r] = remap[static_cast<std::size_t>(codes[r])];
        schema.push_back(std::move(capped));
        disc.push_back(std::move(recoded));
        cont.emplace_back();
    }
    return Dataset(std::move(schema), std::move(disc), std::move(cont));
}

// ---------------------------------------------------------------------------
// contingency tables

std::size_t ContingencyTable::index(const std::vector<int>& cell) const {
    std::size_t idx = 0;
    std::size_t stride = 1;
    for (std::size_t a = 0; a < dims.size(); ++a) {
        idx += static_cast<std::size_t>(cell[a]) * stride;
        stride *= static_cast<std::size_t>(dims[a]);
    }
    return idx;
}

ContingencyTable build_table(const Dataset& data, VarId x, VarId y, const VarSet& s) {
    require(x != y, "build_table: x and y must differ");
    require(!sets::contains(s, x) && !sets::contains(s, y), "build_table: x and y must not be in the conditioning set");
    std::vector<VarId> axes{x, y};
    axes.insert(axes.end(), s.begin(), s.end());

    ContingencyTable t;
    std::size_t size = 1;
    for (VarId v : axes) {
        const auto& var = data.variable(v);
        if (!var.discrete())
            throw Error(ErrorCode::ContinuousVariableInTable, "'" + var.name + "' is continuous");
        t.dims.push_back(var.level_count());
        size *= static_cast<std::size_t>(var.level_count());
    }
    t.counts.assign(size, 0);
    std::vector<std::size_t> idx(data.rows(), 0);
    std::size_t stride = 1;
    for (std::size_t a = 0; a < axes.size(); ++a) {
        const auto& codes = data.codes(axes[a]);
        for (std::size_t r = 0; r < data.rows(); ++r)
            idx[r] += static_cast<std::size_t>(codes[r]) * stride;
        stride *= static_cast<std::size_t>(t.dims[a]);
    }
    for (std::size_t i : idx)
        ++t.counts[i];
    t.total = static_cast<std::int64_t>(data.rows());
    return t;
}

} // namespace causeweave
