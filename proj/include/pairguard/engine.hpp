#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pairguard/concretize.hpp"
#include "pairguard/frontend.hpp"
#include "pairguard/predictor.hpp"
#include "pairguard/value.hpp"

namespace pairguard {

class MergeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ConsistencyEntry {
    Value v_old;
    Value v_new;             // deep copy of v_old made at insertion
    std::string inserted;    // serialize(v_old) at insertion time
};

// Injected values keyed by merged access path. Shared by both sides of one
// iteration.
class ConsistencyMap {
public:
    const ConsistencyEntry* find(const std::string& path) const;
    const ConsistencyEntry& insert(const std::string& path, Value v_old);
    const std::vector<std::string>& paths() const { return order_; }  // insertion order
    std::size_t size() const { return order_.size(); }
    void clear();

private:
    std::unordered_map<std::string, ConsistencyEntry> entries_;
    std::vector<std::string> order_;
};

struct CallLogEntry {
    std::string callee;
    std::vector<std::string> args;
    std::vector<std::pair<std::string, std::string>> kwargs;  // sorted by name
    int occurrence = 1;

    bool operator==(const CallLogEntry& other) const = default;
    std::string render() const;
};

struct ExceptionInfo {
    bool intentional = false;
    std::string type_name;
    std::string args;  // serialized argument tuple

    bool operator==(const ExceptionInfo& other) const = default;
    std::string render() const;
};

struct ExecutionOutcome {
    Side side = Side::Old;
    std::optional<std::string> return_value;
    std::optional<std::string> probe;  // result of calling a returned function once
    std::map<std::string, std::string> injected_state;
    std::string stdout_text;
    std::string stderr_text;
    std::vector<CallLogEntry> call_log;
    std::optional<ExceptionInfo> exception;
    std::set<int> covered_lines;
    std::set<int> covered_changed_lines;
    std::uint64_t steps = 0;
};

// Both function bodies under distinct names, called without arguments.
struct ComparisonProgram {
    std::string old_name;
    std::string new_name;
    SourceFunction old_fn;
    SourceFunction new_fn;
    std::set<int> changed_old;
    std::set<int> changed_new;
    NameMerger merger;
    std::set<std::string> handler_names;  // last components of names in except clauses
    std::vector<std::string> old_lines;
    std::vector<std::string> new_lines;

    const SourceFunction& function(Side side) const { return side == Side::Old ? old_fn : new_fn; }
    const std::set<int>& changed(Side side) const { return side == Side::Old ? changed_old : changed_new; }
    const std::string& name(Side side) const { return side == Side::Old ? old_name : new_name; }
};

ComparisonProgram merge_pair(const FunctionPair& pair);

struct RunConfig {
    double exception_probability = 0.15;
    std::uint64_t step_budget = 100000;
    int generator_cap = 100;
    int max_call_depth = 200;
    std::size_t max_path_length = 1024;
    ConcretizerConfig concretizer;
};

// Executes one side. The map is shared with the other side of the same
// iteration; values are drawn from streams keyed by iteration seed and path.
ExecutionOutcome run_one(Side side, const ComparisonProgram& program, ConsistencyMap& cmap, const StaticFacts& facts,
                         const RunConfig& cfg, const Predictor& predictor, std::uint64_t iteration_seed);

struct IterationRun {
    ExecutionOutcome old_outcome;
    ExecutionOutcome new_outcome;
    std::vector<std::pair<std::string, std::string>> inputs;  // path, value at insertion
};

// Fresh map, old side then new side, then final injected state for both.
IterationRun run_iteration(const ComparisonProgram& program, const StaticFacts& facts, const RunConfig& cfg,
                           const Predictor& predictor, std::uint64_t iteration_seed);

// Type check used for `isinstance`; `classes` are spelled as in the source.
bool builtin_isinstance(const Value& v, const std::vector<std::string>& classes);

// Names treated as exception classes without definition.
bool looks_like_exception_name(const std::string& name);

}  // namespace pairguard
