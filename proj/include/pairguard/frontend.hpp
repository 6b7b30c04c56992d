#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pairguard/parser.hpp"

namespace pairguard {

// Invalid pair: bad rename map or missing function.
class PairError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct FunctionPair {
    SourceFunction old_fn;
    SourceFunction new_fn;
    std::map<std::string, std::string> renames;  // old identifier -> new identifier
    std::set<int> changed_lines_old;
    std::set<int> changed_lines_new;
};

// Parses both versions, validates the rename map and computes changed lines.
FunctionPair make_function_pair(std::string_view old_source, std::string_view new_source,
                       std::map<std::string, std::string> renames = {});

std::vector<std::string> split_lines(std::string_view text);

// True for lines that hold code (not blank, not a pure comment).
bool is_code_line(std::string_view line);

// 1-based numbers of all code lines.
std::set<int> code_lines(std::string_view text);

// LCS diff over whitespace-normalized code lines. Returns the unmatched lines
// of each side.
std::pair<std::set<int>, std::set<int>> diff_changed_lines(std::string_view old_text,
                                                           std::string_view new_text);

enum class Side { Old, New };

// Maps identifiers to the names used as consistency-map keys. A renamed
// identifier becomes `old_renamed_new` under both spellings.
class NameMerger {
public:
    NameMerger() = default;
    explicit NameMerger(const std::map<std::string, std::string>& renames);

    const std::string& merge(const std::string& name, Side side) const;

private:
    std::map<std::string, std::string> old_to_merged_;
    std::map<std::string, std::string> new_to_merged_;
};

struct StaticFacts {
    std::vector<std::int64_t> literals_int;
    std::vector<double> literals_float;
    std::vector<std::string> literals_str;
    std::set<std::string> isinstance_classes;
    // Syntactic callee path (merged names) -> exception types caught around it.
    std::map<std::string, std::set<std::string>> call_exception_map;
};

StaticFacts extract_static_facts(const FunctionPair& pair);

// Syntactic access path of a callee expression with merged identifiers,
// e.g. `self.client.get`. Falls back to the rendered expression.
std::string callee_path(const ast::Expr& func, const NameMerger& merger, Side side);

}  // namespace pairguard
