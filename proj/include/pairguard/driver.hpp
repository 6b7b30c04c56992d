#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "pairguard/comparator.hpp"
#include "pairguard/frontend.hpp"
#include "pairguard/predictor.hpp"

namespace pairguard {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct EngineConfig {
    int max_iterations = 300;
    std::uint64_t seed = 0;
    double exception_probability = 0.15;
    int max_structure_size = 4;
    double object_bias = 0.5;
    std::uint64_t step_budget = 100000;
    int generator_cap = 100;
};

// Throws ConfigError for out-of-range settings.
void validate(const EngineConfig& cfg);

enum class Classification { SemanticsChanging, LikelySemanticsPreserving, Inconclusive };
const char* to_string(Classification c);

struct CoverageReport {
    double changed_old = 1.0;  // fraction of changed lines covered; 1.0 without changed lines
    double changed_new = 1.0;
    double overall = 0.0;      // covered code lines over all code lines, both sides
    std::set<int> covered_old;  // cumulative, code lines only
    std::set<int> covered_new;
    std::set<int> covered_changed_old;
    std::set<int> covered_changed_new;
    std::size_t code_lines_old = 0;
    std::size_t code_lines_new = 0;
    std::size_t changed_lines_old = 0;
    std::size_t changed_lines_new = 0;
};

struct Verdict {
    Classification classification = Classification::Inconclusive;
    int iterations_run = 0;
    int abstained_iterations = 0;
    std::optional<Difference> difference;
    CoverageReport coverage;
    double wall_time_ms = 0.0;
};

// Runs up to cfg.max_iterations iterations and stops at the first difference.
Verdict analyze(const FunctionPair& pair, const EngineConfig& cfg, const Predictor& predictor);

// Fractions recomputed from the cumulative line sets held by the verdict.
CoverageReport coverage_report(const Verdict& verdict);

// Seed of iteration `index` (1-based).
std::uint64_t iteration_seed(std::uint64_t seed, int index);

// Analyzes independent pairs; the OpenMP version uses up to `jobs` threads
// (0 picks the runtime default). Results keep input order.
std::vector<Verdict> analyze_batch(const std::vector<FunctionPair>& pairs, const EngineConfig& cfg,
                                   const Predictor& predictor, int jobs = 0);
std::vector<Verdict> analyze_batch_serial(const std::vector<FunctionPair>& pairs, const EngineConfig& cfg,
                                          const Predictor& predictor);

}  // namespace pairguard
