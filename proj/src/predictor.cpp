#include "pairguard/predictor.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace pairguard {

namespace {

constexpr const char* kQueryKindNames[] = {"variable-read", "attribute-read", "call-return", "subscript-result"};

using K = AbstractKind;

std::size_t idx(K k) { return static_cast<std::size_t>(k); }

// Raw (unnormalized) starting weights per query kind.
std::array<double, kAbstractKindCount> base_weights(QueryKind kind) {
    //       None Bool Int  Flt  Str  List Tup  Dict Set  Call Res  Obj
    switch (kind) {
        case QueryKind::AttributeRead: return {1.0, 0.5, 1.0, 0.5, 1.0, 1.0, 0.3, 0.7, 0.3, 0.7, 0.5, 6.0};
        case QueryKind::CallReturn: return {1.5, 0.5, 1.0, 0.5, 1.0, 1.0, 0.3, 0.7, 0.3, 0.5, 0.5, 6.0};
        case QueryKind::SubscriptResult: return {1.0, 1.0, 2.0, 1.0, 2.0, 1.0, 0.5, 1.0, 0.5, 0.3, 0.3, 3.0};
        case QueryKind::VariableRead: break;
    }
    return {1.0, 1.0, 2.0, 1.0, 2.0, 1.5, 0.5, 1.0, 0.5, 0.5, 0.5, 3.0};
}

constexpr double kRuleBoost = 20.0;
constexpr double kContextBoost = 10.0;

bool starts_with(std::string_view s, std::string_view p) { return s.substr(0, p.size()) == p; }
bool ends_with(std::string_view s, std::string_view p) {
    return s.size() >= p.size() && s.substr(s.size() - p.size()) == p;
}
bool has(std::string_view s, std::string_view p) { return s.find(p) != std::string_view::npos; }

// Identifier the rules look at: last path segment, quotes and call markers
// stripped.
std::string rule_name(std::string_view name) {
    std::string_view s = name;
    if (auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    while (ends_with(s, "()")) s.remove_suffix(2);
    if (auto dot = s.rfind('.'); dot != std::string_view::npos) s = s.substr(dot + 1);
    if (s.size() >= 2 && (s.front() == '\'' || s.front() == '"') && s.back() == s.front()) {
        s = s.substr(1, s.size() - 2);
    }
    return std::string(s);
}

std::optional<K> name_rule(const std::string& original, QueryKind kind) {
    if (original.empty()) return std::nullopt;
    std::string n = original;
    std::transform(n.begin(), n.end(), n.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (starts_with(n, "is_") || starts_with(n, "has_")) return K::Boolean;
    if (n == "n" || n == "i" || n == "j" || n == "k" || n == "retries" || ends_with(n, "times") ||
        starts_with(n, "max_") || starts_with(n, "min_") || has(n, "count") || has(n, "size") || has(n, "index") ||
        has(n, "num") || has(n, "total") || has(n, "len")) {
        return K::Integer;
    }
    if (has(n, "ratio") || has(n, "rate") || has(n, "prob") || has(n, "score")) return K::Float;
    if (ends_with(n, "_map") || ends_with(n, "_dict") || n == "meta" || n == "config" || n == "options" ||
        n == "headers" || n == "params" || n == "kwargs") {
        return K::Dictionary;
    }
    if (ends_with(n, "_set")) return K::Set;
    if (ends_with(n, "_list")) return K::List;
    if (has(n, "name") || has(n, "msg") || has(n, "path") || has(n, "key") || has(n, "text") || has(n, "url") ||
        has(n, "prefix")) {
        return K::String;
    }
    // Plural nouns read as collections only for plain variables and indexes;
    // attribute and call results named like `stats` are usually objects.
    bool plural = n.size() > 3 && n.back() == 's' && !ends_with(n, "ss");
    if (plural && (kind == QueryKind::VariableRead || kind == QueryKind::SubscriptResult)) return K::List;
    if (std::isupper(static_cast<unsigned char>(original[0]))) {
        return kind == QueryKind::VariableRead ? K::Callable : K::Object;
    }
    return std::nullopt;
}

bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// True when `name` appears in `context` as an operand of <, <=, > or >=.
bool in_ordering(std::string_view context, std::string_view name) {
    if (name.empty()) return false;
    std::size_t pos = 0;
    while ((pos = context.find(name, pos)) != std::string_view::npos) {
        std::size_t end = pos + name.size();
        bool whole = (pos == 0 || !is_ident_char(context[pos - 1])) && (end >= context.size() || !is_ident_char(context[end]));
        if (whole) {
            std::size_t a = end;
            while (a < context.size() && context[a] == ' ') ++a;
            if (a < context.size() && (context[a] == '<' || context[a] == '>')) return true;
            std::size_t b = pos;
            while (b > 0 && context[b - 1] == ' ') --b;
            char prev = b > 0 ? context[b - 1] : '\0';
            if (prev == '=' && b > 1) prev = context[b - 2];
            if (prev == '<' || prev == '>') return true;
        }
        pos = end;
    }
    return false;
}

Distribution normalize(const std::array<double, kAbstractKindCount>& raw) {
    double total = 0;
    for (double w : raw) total += w;
    Distribution d;
    for (std::size_t i = 0; i < raw.size(); ++i) d.weights[i] = 0.01 + 0.88 * raw[i] / total;
    return d;
}

}  // namespace

const char* to_string(QueryKind kind) { return kQueryKindNames[static_cast<int>(kind)]; }

std::optional<QueryKind> parse_query_kind(std::string_view text) {
    for (int i = 0; i < 4; ++i) {
        if (text == kQueryKindNames[i]) return static_cast<QueryKind>(i);
    }
    return std::nullopt;
}

double Distribution::sum() const {
    double s = 0;
    for (double w : weights) s += w;
    return s;
}

AbstractKind Distribution::argmax() const {
    return static_cast<AbstractKind>(std::max_element(weights.begin(), weights.end()) - weights.begin());
}

AbstractKind Distribution::sample(Rng& rng) const {
    double total = sum();
    double u = rng.unit() * total;
    double acc = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (u < acc && weights[i] > 0) return static_cast<AbstractKind>(i);
    }
    for (std::size_t i = weights.size(); i-- > 0;) {
        if (weights[i] > 0) return static_cast<AbstractKind>(i);
    }
    return AbstractKind::Object;
}

Distribution HeuristicPredictor::predict(const InjectionQuery& query) const {
    auto raw = base_weights(query.kind);
    std::string name = rule_name(query.name);
    if (auto kind = name_rule(name, query.kind)) raw[idx(*kind)] += kRuleBoost;
    if (in_ordering(query.context, name)) raw[idx(K::Integer)] += kContextBoost;
    return normalize(raw);
}

TablePredictor::TablePredictor(std::map<std::pair<QueryKind, std::string>, Distribution> entries)
    : entries_(std::move(entries)) {}

Distribution TablePredictor::predict(const InjectionQuery& query) const {
    auto it = entries_.find({query.kind, query.name});
    if (it != entries_.end()) return it->second;
    return fallback_.predict(query);
}

std::shared_ptr<const TablePredictor> parse_table_predictor(std::string_view json_text) {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("predictor table is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("entries") || !doc["entries"].is_array()) {
        throw FormatError("predictor table needs an \"entries\" array");
    }
    std::map<std::pair<QueryKind, std::string>, Distribution> entries;
    std::size_t n = 0;
    for (const auto& entry : doc["entries"]) {
        std::string where = "entry " + std::to_string(n++);
        if (!entry.is_object() || !entry.contains("kind") || !entry.contains("name") || !entry.contains("weights")) {
            throw FormatError(where + ": needs kind, name and weights");
        }
        if (!entry["kind"].is_string() || !entry["name"].is_string() || !entry["weights"].is_object()) {
            throw FormatError(where + ": wrong field types");
        }
        auto kind = parse_query_kind(entry["kind"].get<std::string>());
        if (!kind) throw FormatError(where + ": unknown query kind " + entry["kind"].dump());
        Distribution d;
        for (const auto& [key, value] : entry["weights"].items()) {
            auto abstract = parse_abstract_kind(key);
            if (!abstract) throw FormatError(where + ": unknown abstract value '" + key + "'");
            if (!value.is_number()) throw FormatError(where + ": weight for " + key + " is not a number");
            double w = value.get<double>();
            if (!(w >= 0.0) || !std::isfinite(w)) throw FormatError(where + ": negative weight for " + key);
            d.weights[idx(*abstract)] = w;
        }
        if (std::fabs(d.sum() - 1.0) > 1e-9) {
            throw FormatError(where + ": weights sum to " + std::to_string(d.sum()) + ", expected 1");
        }
        entries[{*kind, entry["name"].get<std::string>()}] = d;
    }
    return std::make_shared<TablePredictor>(std::move(entries));
}

std::shared_ptr<const TablePredictor> load_table_predictor(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open predictor table " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_table_predictor(buffer.str());
}

std::shared_ptr<const Predictor> make_predictor(const std::string& spec) {
    if (spec == "heuristic") return std::make_shared<HeuristicPredictor>();
    if (starts_with(spec, "table:")) return load_table_predictor(spec.substr(6));
    throw FormatError("unknown predictor '" + spec + "' (expected heuristic or table:<path>)");
}

}  // namespace pairguard
