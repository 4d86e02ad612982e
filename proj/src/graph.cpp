#include "causeweave/graph.hpp"

#include <json.hpp>

#include <cctype>
#include <charconv>
#include <deque>
#include <fstream>
#include <sstream>

namespace causeweave {

Cpdag::Cpdag(std::vector<std::string> names) : names_(std::move(names)) {
    marks_.assign(names_.size() * names_.size(), Mark::None);
}

VarId Cpdag::id_of(std::string_view name) const {
    for (std::size_t v = 0; v < names_.size(); ++v)
        if (names_[v] == name)
            return static_cast<VarId>(v);
    throw Error(ErrorCode::UnknownVertex, "unknown vertex '" + std::string(name) + "'");
}

void Cpdag::check(VarId v) const {
    if (v < 0 || static_cast<std::size_t>(v) >= names_.size())
        throw Error(ErrorCode::UnknownVertex, "vertex id " + std::to_string(v) + " out of range");
}

std::size_t Cpdag::index(VarId a, VarId b) const {
    check(a);
    check(b);
    return static_cast<std::size_t>(a) * names_.size() + static_cast<std::size_t>(b);
}

void Cpdag::add_undirected(VarId a, VarId b) {
    require(a != b, "self loops are not allowed");
    marks_[index(a, b)] = Mark::Plain;
    marks_[index(b, a)] = Mark::Plain;
}

void Cpdag::add_directed(VarId from, VarId to) {
    require(from != to, "self loops are not allowed");
    marks_[index(from, to)] = Mark::Out;
    marks_[index(to, from)] = Mark::In;
}

void Cpdag::orient(VarId from, VarId to) {
    require(adjacent(from, to), "cannot orient a missing edge");
    add_directed(from, to);
}

void Cpdag::remove_edge(VarId a, VarId b) {
    marks_[index(a, b)] = Mark::None;
    marks_[index(b, a)] = Mark::None;
    significance.erase(unordered_pair(a, b));
}

VarSet Cpdag::neighbors(VarId v) const {
    VarSet out;
    for (VarId u = 0; u < static_cast<VarId>(names_.size()); ++u)
        if (u != v && adjacent(v, u))
            out.push_back(u);
    return out;
}

VarSet Cpdag::parents(VarId v) const {
    VarSet out;
    for (VarId u = 0; u < static_cast<VarId>(names_.size()); ++u)
        if (u != v && directed(u, v))
            out.push_back(u);
    return out;
}

VarSet Cpdag::children(VarId v) const {
    VarSet out;
    for (VarId u = 0; u < static_cast<VarId>(names_.size()); ++u)
        if (u != v && directed(v, u))
            out.push_back(u);
    return out;
}

VarSet Cpdag::undirected_neighbors(VarId v) const {
    VarSet out;
    for (VarId u = 0; u < static_cast<VarId>(names_.size()); ++u)
        if (u != v && undirected(v, u))
            out.push_back(u);
    return out;
}

std::vector<VertexPair> Cpdag::directed_edges() const {
    std::vector<VertexPair> out;
    const auto p = static_cast<VarId>(names_.size());
    for (VarId a = 0; a < p; ++a)
        for (VarId b = 0; b < p; ++b)
            if (a != b && directed(a, b))
                out.emplace_back(a, b);
    return out;
}

std::vector<VertexPair> Cpdag::undirected_edges() const {
    std::vector<VertexPair> out;
    const auto p = static_cast<VarId>(names_.size());
    for (VarId a = 0; a < p; ++a)
        for (VarId b = a + 1; b < p; ++b)
            if (undirected(a, b))
                out.emplace_back(a, b);
    return out;
}

std::vector<VertexPair> Cpdag::skeleton() const {
    std::vector<VertexPair> out;
    const auto p = static_cast<VarId>(names_.size());
    for (VarId a = 0; a < p; ++a)
        for (VarId b = a + 1; b < p; ++b)
            if (adjacent(a, b))
                out.emplace_back(a, b);
    return out;
}

std::size_t Cpdag::edge_count() const { return skeleton().size(); }
std::size_t Cpdag::directed_count() const { return directed_edges().size(); }

bool Cpdag::has_directed_path(VarId from, VarId to) const {
    std::vector<char> seen(names_.size(), 0);
    std::vector<VarId> stack{from};
    while (!stack.empty()) {
        VarId v = stack.back();
        stack.pop_back();
        for (VarId c : children(v)) {
            if (c == to)
                return true;
            if (!seen[static_cast<std::size_t>(c)]) {
                seen[static_cast<std::size_t>(c)] = 1;
                stack.push_back(c);
            }
        }
    }
    return false;
}

bool Cpdag::has_directed_cycle() const {
    const std::size_t p = names_.size();
    std::vector<std::size_t> indeg(p, 0);
    for (auto [a, b] : directed_edges())
        ++indeg[static_cast<std::size_t>(b)];
    std::vector<VarId> ready;
    for (std::size_t v = 0; v < p; ++v)
        if (!indeg[v])
            ready.push_back(static_cast<VarId>(v));
    std::size_t seen = 0;
    while (!ready.empty()) {
        VarId v = ready.back();
        ready.pop_back();
        ++seen;
        for (VarId c : children(v))
            if (--indeg[static_cast<std::size_t>(c)] == 0)
                ready.push_back(c);
    }
    return seen != p;
}

// ---------------------------------------------------------------------------

bool PriorKnowledge::allows(VarId from, VarId to) const {
    if (forbidden.count({from, to}))
        return false;
    auto tf = tiers.find(from);
    auto tt = tiers.find(to);
    if (tf != tiers.end() && tt != tiers.end() && tf->second > tt->second)
        return false;
    return true;
}

void PriorKnowledge::validate(std::size_t vertices) const {
    auto check = [&](VarId v) {
        if (v < 0 || static_cast<std::size_t>(v) >= vertices)
            throw Error(ErrorCode::UnknownVertex, "prior knowledge references an unknown vertex");
    };
    for (auto [v, t] : tiers) {
        check(v);
        require(t >= 0, "tiers must be non-negative");
    }
    for (auto [a, b] : forbidden) {
        check(a);
        check(b);
    }
    for (auto e : required) {
        check(e.first);
        check(e.second);
        if (forbidden.count(e))
            throw Error(ErrorCode::PreconditionViolation, "an edge is both required and forbidden");
    }
    // required edges + tier precedence must admit a topological order
    Cpdag g{std::vector<std::string>(vertices)};
    for (auto [a, b] : required) {
        if (!allows(a, b) || g.directed(b, a))
            throw Error(ErrorCode::PriorKnowledgeCycle, "required edge contradicts tiers or another required edge");
        g.add_directed(a, b);
    }
    if (g.has_directed_cycle())
        throw Error(ErrorCode::PriorKnowledgeCycle, "required edges form a directed cycle");
}

namespace {

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

VarId lookup(const std::vector<std::string>& names, const std::string& name) {
    for (std::size_t v = 0; v < names.size(); ++v)
        if (names[v] == name)
            return static_cast<VarId>(v);
    throw Error(ErrorCode::UnknownVertex, "unknown vertex '" + name + "'");
}

std::string fmt_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

std::string dot_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\')
            out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

} // namespace

PriorKnowledge parse_prior(std::string_view json_text, const std::vector<std::string>& names) {
    PriorKnowledge pk;
    try {
        auto doc = nlohmann::json::parse(json_text);
        if (doc.contains("tiers"))
            for (auto& [name, tier] : doc.at("tiers").items())
                pk.tiers[lookup(names, name)] = tier.get<int>();
        auto pairs = [&](const char* key, std::set<VertexPair>& out) {
            if (!doc.contains(key))
                return;
            for (const auto& e : doc.at(key)) {
                if (!e.is_array() || e.size() != 2)
                    throw Error(ErrorCode::Io, std::string("'") + key + "' entries must be [from, to] pairs");
                out.emplace(lookup(names, e[0].get<std::string>()), lookup(names, e[1].get<std::string>()));
            }
        };
        pairs("forbidden", pk.forbidden);
        pairs("required", pk.required);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Io, std::string("malformed prior-knowledge file: ") + e.what());
    }
    pk.validate(names.size());
    return pk;
}

PriorKnowledge load_prior(const std::filesystem::path& path, const std::vector<std::string>& names) {
    return parse_prior(slurp(path), names);
}

PriorKnowledge prior_from_tiers(const std::vector<std::optional<int>>& tiers) {
    PriorKnowledge pk;
    for (std::size_t v = 0; v < tiers.size(); ++v)
        if (tiers[v])
            pk.tiers[static_cast<VarId>(v)] = *tiers[v];
    return pk;
}

std::string to_json(const Cpdag& g, int indent) {
    const auto& n = g.names();
    auto name = [&](VarId v) { return n[static_cast<std::size_t>(v)]; };
    nlohmann::ordered_json doc;
    doc["vertices"] = n;
    doc["directed"] = nlohmann::ordered_json::array();
    for (auto [a, b] : g.directed_edges())
        doc["directed"].push_back({name(a), name(b)});
    doc["undirected"] = nlohmann::ordered_json::array();
    for (auto [a, b] : g.undirected_edges())
        doc["undirected"].push_back({name(a), name(b)});
    doc["significance"] = nlohmann::ordered_json::array();
    for (const auto& [pair, p] : g.significance)
        doc["significance"].push_back({{"x", name(pair.first)}, {"y", name(pair.second)}, {"p", p}});
    doc["sepsets"] = nlohmann::ordered_json::array();
    for (const auto& [pair, rec] : g.sepsets) {
        std::vector<std::string> s;
        for (VarId v : rec.witness)
            s.push_back(name(v));
        doc["sepsets"].push_back({{"x", name(pair.first)}, {"y", name(pair.second)}, {"s", s}, {"p", rec.p_value}});
    }
    return doc.dump(indent);
}

Cpdag cpdag_from_json(std::string_view text) {
    try {
        auto doc = nlohmann::json::parse(text);
        Cpdag g(doc.at("vertices").get<std::vector<std::string>>());
        const auto& names = g.names();
        auto id = [&](const nlohmann::json& j) { return lookup(names, j.get<std::string>()); };
        if (doc.contains("directed"))
            for (const auto& e : doc.at("directed"))
                g.add_directed(id(e.at(0)), id(e.at(1)));
        if (doc.contains("undirected"))
            for (const auto& e : doc.at("undirected"))
                g.add_undirected(id(e.at(0)), id(e.at(1)));
        if (doc.contains("significance"))
            for (const auto& e : doc.at("significance"))
                g.significance[unordered_pair(id(e.at("x")), id(e.at("y")))] = e.at("p").get<double>();
        if (doc.contains("sepsets"))
            for (const auto& e : doc.at("sepsets")) {
                SepsetRecord rec;
                for (const auto& v : e.at("s"))
                    rec.witness.push_back(id(v));
                rec.witness = sets::make(std::move(rec.witness));
                rec.p_value = e.at("p").get<double>();
                g.sepsets[unordered_pair(id(e.at("x")), id(e.at("y")))] = std::move(rec);
            }
        return g;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Io, std::string("malformed graph document: ") + e.what());
    }
}

std::string to_dot(const Cpdag& g) {
    const auto& n = g.names();
    auto name = [&](VarId v) { return dot_quote(n[static_cast<std::size_t>(v)]); };
    auto attr = [&](VarId a, VarId b) -> std::string {
        auto it = g.significance.find(unordered_pair(a, b));
        if (it == g.significance.end())
            return "";
        return " [pvalue=" + fmt_double(it->second) + "]";
    };
    std::string out = "digraph cpdag {\n";
    for (const auto& v : n)
        out += "  " + dot_quote(v) + ";\n";
    for (auto [a, b] : g.directed_edges())
        out += "  " + name(a) + " -> " + name(b) + attr(a, b) + ";\n";
    for (auto [a, b] : g.undirected_edges())
        out += "  " + name(a) + " -- " + name(b) + attr(a, b) + ";\n";
    out += "}\n";
    return out;
}

namespace {

// Tokenizer for the DOT subset written by to_dot.
class DotLexer {
public:
    explicit DotLexer(std::string_view s) : s_(s) {}

    std::optional<std::string> next() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_])))
            ++i_;
        if (i_ >= s_.size())
            return std::nullopt;
        char c = s_[i_];
        if (c == '"') {
            std::string out;
            ++i_;
            while (i_ < s_.size() && s_[i_] != '"') {
                if (s_[i_] == '\\' && i_ + 1 < s_.size())
                    ++i_;
                out.push_back(s_[i_++]);
            }
            if (i_ >= s_.size())
                throw Error(ErrorCode::Io, "unterminated string in DOT input");
            ++i_;
            return "\"" + out;
        }
        if ((c == '-' && i_ + 1 < s_.size() && (s_[i_ + 1] == '>' || s_[i_ + 1] == '-'))) {
            i_ += 2;
            return std::string(s_.substr(i_ - 2, 2));
        }
        if (std::string_view("{}[];=,").find(c) != std::string_view::npos) {
            ++i_;
            return std::string(1, c);
        }
        std::string out;
        while (i_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[i_])) &&
               std::string_view("{}[];=,\"").find(s_[i_]) == std::string_view::npos)
            out.push_back(s_[i_++]);
        return out;
    }

private:
    std::string_view s_;
    std::size_t i_ = 0;
};

} // namespace

Cpdag cpdag_from_dot(std::string_view text) {
    DotLexer lex(text);
    std::vector<std::string> tokens;
    while (auto t = lex.next())
        tokens.push_back(*t);

    std::size_t i = 0;
    auto expect = [&](const std::string& t) {
        if (i >= tokens.size() || tokens[i] != t)
            throw Error(ErrorCode::Io, "malformed DOT input: expected '" + t + "'");
        ++i;
    };
    if (i < tokens.size() && (tokens[i] == "digraph" || tokens[i] == "graph"))
        ++i;
    if (i < tokens.size() && tokens[i] != "{")
        ++i; // graph name
    expect("{");

    struct Stmt {
        std::string a, op, b;
        std::optional<double> p;
    };
    std::vector<std::string> names;
    std::vector<Stmt> edges;
    auto add_name = [&](const std::string& v) {
        if (std::find(names.begin(), names.end(), v) == names.end())
            names.push_back(v);
    };
    auto ident = [&]() {
        if (i >= tokens.size())
            throw Error(ErrorCode::Io, "malformed DOT input: unexpected end");
        std::string t = tokens[i++];
        return t.starts_with("\"") ? t.substr(1) : t;
    };
    while (i < tokens.size() && tokens[i] != "}") {
        Stmt st;
        st.a = ident();
        add_name(st.a);
        if (i < tokens.size() && (tokens[i] == "->" || tokens[i] == "--")) {
            st.op = tokens[i++];
            st.b = ident();
            add_name(st.b);
        }
        if (i < tokens.size() && tokens[i] == "[") {
            ++i;
            while (i < tokens.size() && tokens[i] != "]") {
                std::string key = ident();
                expect("=");
                std::string value = ident();
                if (key == "pvalue")
                    st.p = std::stod(value);
                if (i < tokens.size() && tokens[i] == ",")
                    ++i;
            }
            expect("]");
        }
        if (i < tokens.size() && tokens[i] == ";")
            ++i;
        if (!st.op.empty())
            edges.push_back(std::move(st));
    }
    expect("}");

    Cpdag g(names);
    for (const auto& st : edges) {
        VarId a = g.id_of(st.a);
        VarId b = g.id_of(st.b);
        if (st.op == "->")
            g.add_directed(a, b);
        else
            g.add_undirected(a, b);
        if (st.p)
            g.significance[unordered_pair(a, b)] = *st.p;
    }
    return g;
}

Cpdag load_graph(const std::filesystem::path& path) {
    std::string text = slurp(path);
    auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{')
        return cpdag_from_json(text);
    return cpdag_from_dot(text);
}

std::vector<int> distances_from(const Cpdag& g, VarId source) {
    std::vector<int> dist(g.vertices(), -1);
    std::deque<VarId> queue{source};
    dist.at(static_cast<std::size_t>(source)) = 0;
    while (!queue.empty()) {
        VarId v = queue.front();
        queue.pop_front();
        for (VarId u : g.neighbors(v))
            if (dist[static_cast<std::size_t>(u)] < 0) {
                dist[static_cast<std::size_t>(u)] = dist[static_cast<std::size_t>(v)] + 1;
                queue.push_back(u);
            }
    }
    return dist;
}

} // namespace causeweave
