#include "pairguard/driver.hpp"

#include <omp.h>

#include <chrono>
#include <cmath>
#include <exception>

#include "pairguard/concretize.hpp"
#include "pairguard/engine.hpp"
#include "pairguard/rng.hpp"

namespace pairguard {

void validate(const EngineConfig& cfg) {
    auto probability = [](double p, const char* name) {
        if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
            throw ConfigError(std::string(name) + " must be within [0, 1]");
        }
    };
    if (cfg.max_iterations < 1) throw ConfigError("max_iterations must be at least 1");
    probability(cfg.exception_probability, "exception_probability");
    probability(cfg.object_bias, "object_bias");
    if (cfg.max_structure_size < 0) throw ConfigError("max_structure_size must not be negative");
    if (cfg.step_budget < 1) throw ConfigError("step_budget must be at least 1");
    if (cfg.generator_cap < 0) throw ConfigError("generator_cap must not be negative");
}

const char* to_string(Classification c) {
    switch (c) {
        case Classification::SemanticsChanging: return "semantics-changing";
        case Classification::LikelySemanticsPreserving: return "likely-semantics-preserving";
        case Classification::Inconclusive: return "inconclusive";
    }
    return "?";
}

std::uint64_t iteration_seed(std::uint64_t seed, int index) {
    return hash_combine(seed, static_cast<std::uint64_t>(index));
}

CoverageReport coverage_report(const Verdict& verdict) {
    CoverageReport r = verdict.coverage;
    auto fraction = [](std::size_t covered, std::size_t total) {
        return total == 0 ? 1.0 : static_cast<double>(covered) / static_cast<double>(total);
    };
    r.changed_old = fraction(r.covered_changed_old.size(), r.changed_lines_old);
    r.changed_new = fraction(r.covered_changed_new.size(), r.changed_lines_new);
    r.overall = fraction(r.covered_old.size() + r.covered_new.size(), r.code_lines_old + r.code_lines_new);
    return r;
}

Verdict analyze(const FunctionPair& pair, const EngineConfig& cfg, const Predictor& predictor) {
    validate(cfg);
    auto start = std::chrono::steady_clock::now();

    ComparisonProgram program = merge_pair(pair);
    StaticFacts facts = extract_static_facts(pair);
    RunConfig run;
    run.exception_probability = cfg.exception_probability;
    run.step_budget = cfg.step_budget;
    run.generator_cap = cfg.generator_cap;
    run.concretizer = make_concretizer_config(facts, cfg.max_structure_size, cfg.object_bias);

    std::set<int> code_old = code_lines(pair.old_fn.source_text);
    std::set<int> code_new = code_lines(pair.new_fn.source_text);

    Verdict v;
    CoverageReport& cov = v.coverage;
    cov.code_lines_old = code_old.size();
    cov.code_lines_new = code_new.size();
    cov.changed_lines_old = pair.changed_lines_old.size();
    cov.changed_lines_new = pair.changed_lines_new.size();

    for (int i = 1; i <= cfg.max_iterations; ++i) {
        IterationRun r = run_iteration(program, facts, run, predictor, iteration_seed(cfg.seed, i));
        ++v.iterations_run;
        for (int l : r.old_outcome.covered_lines) {
            if (code_old.count(l)) cov.covered_old.insert(l);
        }
        for (int l : r.new_outcome.covered_lines) {
            if (code_new.count(l)) cov.covered_new.insert(l);
        }
        cov.covered_changed_old.insert(r.old_outcome.covered_changed_lines.begin(),
                                       r.old_outcome.covered_changed_lines.end());
        cov.covered_changed_new.insert(r.new_outcome.covered_changed_lines.begin(),
                                       r.new_outcome.covered_changed_lines.end());

        IterationResult result = compare(r.old_outcome, r.new_outcome, r.inputs);
        if (result.status == Status::Abstain) ++v.abstained_iterations;
        if (result.status == Status::Difference) {
            v.difference = std::move(result.difference);
            break;
        }
    }

    bool has_changes = cov.changed_lines_old + cov.changed_lines_new > 0;
    bool reached = !has_changes || !cov.covered_changed_old.empty() || !cov.covered_changed_new.empty();
    if (v.difference) {
        v.classification = Classification::SemanticsChanging;
    } else if (!reached || v.abstained_iterations == v.iterations_run) {
        v.classification = Classification::Inconclusive;
    } else {
        v.classification = Classification::LikelySemanticsPreserving;
    }
    v.coverage = coverage_report(v);
    v.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return v;
}

std::vector<Verdict> analyze_batch(const std::vector<FunctionPair>& pairs, const EngineConfig& cfg,
                                   const Predictor& predictor, int jobs) {
    validate(cfg);
    std::vector<Verdict> out(pairs.size());
    int threads = jobs > 0 ? jobs : omp_get_max_threads();
    auto n = static_cast<std::ptrdiff_t>(pairs.size());
    std::vector<std::exception_ptr> errors(pairs.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        auto k = static_cast<std::size_t>(i);
        try {
            out[k] = analyze(pairs[k], cfg, predictor);
        } catch (const std::exception&) {
            errors[k] = std::current_exception();
        }
    }
    // first failure in input order, as the serial version would report
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

std::vector<Verdict> analyze_batch_serial(const std::vector<FunctionPair>& pairs, const EngineConfig& cfg,
                                          const Predictor& predictor) {
    validate(cfg);
    std::vector<Verdict> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) out.push_back(analyze(p, cfg, predictor));
    return out;
}

}  // namespace pairguard
