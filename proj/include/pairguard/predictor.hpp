#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include "pairguard/rng.hpp"
#include "pairguard/value.hpp"

namespace pairguard {

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class QueryKind { VariableRead, AttributeRead, CallReturn, SubscriptResult };

const char* to_string(QueryKind kind);
std::optional<QueryKind> parse_query_kind(std::string_view text);

struct InjectionQuery {
    QueryKind kind = QueryKind::VariableRead;
    std::string name;     // identifier, callee path, or rendered index
    std::string context;  // source text around the injection site
};

struct Distribution {
    std::array<double, kAbstractKindCount> weights{};

    double operator[](AbstractKind k) const { return weights[static_cast<std::size_t>(k)]; }
    double sum() const;
    AbstractKind argmax() const;
    AbstractKind sample(Rng& rng) const;
};

class Predictor {
public:
    virtual ~Predictor() = default;
    virtual Distribution predict(const InjectionQuery& query) const = 0;
};

// Name and context rules; every kind keeps at least 0.01 probability.
class HeuristicPredictor : public Predictor {
public:
    Distribution predict(const InjectionQuery& query) const override;
};

// Exact (kind, name) lookups with heuristic fallback.
class TablePredictor : public Predictor {
public:
    explicit TablePredictor(std::map<std::pair<QueryKind, std::string>, Distribution> entries);
    Distribution predict(const InjectionQuery& query) const override;
    std::size_t size() const { return entries_.size(); }

private:
    std::map<std::pair<QueryKind, std::string>, Distribution> entries_;
    HeuristicPredictor fallback_;
};

// Parses the JSON table format; throws FormatError.
std::shared_ptr<const TablePredictor> parse_table_predictor(std::string_view json_text);
std::shared_ptr<const TablePredictor> load_table_predictor(const std::string& path);

// "heuristic" or "table:<path>".
std::shared_ptr<const Predictor> make_predictor(const std::string& spec);

}  // namespace pairguard
