#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pairguard/engine.hpp"
#include "pairguard/value.hpp"

namespace pairguard {

enum class Status { Difference, Equivalent, Abstain };
enum class Dimension { State, Output, Calls, Exception };

const char* to_string(Status s);
const char* to_string(Dimension d);

struct Difference {
    Dimension dimension = Dimension::State;
    std::string location;  // e.g. "return value", "stdout", "call 2"
    std::string old_evidence;
    std::string new_evidence;
    std::vector<std::pair<std::string, std::string>> inputs;  // injected values at insertion

    // Stable text block: `dimension:`, `location:`, `old:`, `new:`, `inputs:`.
    std::string render() const;
    bool operator==(const Difference& other) const = default;
};

struct IterationResult {
    Status status = Status::Equivalent;
    std::optional<Difference> difference;
};

// Exception triage, then return value and probe, injected state, output and
// calls, reporting the first difference.
IterationResult compare(const ExecutionOutcome& old_outcome, const ExecutionOutcome& new_outcome,
                        const std::vector<std::pair<std::string, std::string>>& inputs = {});

// Materializes a generator into a list of at most `cap` elements; other
// values are returned unchanged.
Value unwrap_return(const Value& v, int cap = 100);

}  // namespace pairguard
