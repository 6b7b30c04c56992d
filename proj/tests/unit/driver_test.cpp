#include <gtest/gtest.h>

#include <algorithm>

#include "../support/fixtures.hpp"
#include "pairguard/driver.hpp"

using namespace pairguard;
using testsupport::fixture_pair;
using testsupport::fixture_path;

namespace {

HeuristicPredictor heuristic;

EngineConfig with_k(int k, std::uint64_t seed = 0) {
    EngineConfig c;
    c.max_iterations = k;
    c.seed = seed;
    return c;
}

bool subset(const std::set<int>& a, const std::set<int>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace

TEST(Config, Validation) {
    EXPECT_NO_THROW(validate(EngineConfig{}));
    auto bad = [](auto mutate) {
        EngineConfig c;
        mutate(c);
        return c;
    };
    EXPECT_THROW(validate(bad([](EngineConfig& c) { c.max_iterations = 0; })), ConfigError);
    EXPECT_THROW(validate(bad([](EngineConfig& c) { c.exception_probability = 1.5; })), ConfigError);
    EXPECT_THROW(validate(bad([](EngineConfig& c) { c.exception_probability = -0.1; })), ConfigError);
    EXPECT_THROW(validate(bad([](EngineConfig& c) { c.object_bias = 2.0; })), ConfigError);
    EXPECT_THROW(validate(bad([](EngineConfig& c) { c.max_structure_size = -1; })), ConfigError);
    auto pair = fixture_pair("id_clamp");
    EXPECT_THROW(analyze(pair, bad([](EngineConfig& c) { c.max_iterations = -4; }), heuristic), ConfigError);
}

TEST(Analyze, IdentityIsPreserving) {
    auto v = analyze(fixture_pair("id_word_count"), EngineConfig{}, heuristic);
    EXPECT_EQ(v.classification, Classification::LikelySemanticsPreserving);
    EXPECT_EQ(v.iterations_run, 300);
    EXPECT_FALSE(v.difference);
}

TEST(Analyze, RetryChangeIsStateDifference) {
    auto table = load_table_predictor(fixture_path("predictors/retry.json"));
    auto v = analyze(fixture_pair("retry_meta"), with_k(300, 1), *table);
    ASSERT_EQ(v.classification, Classification::SemanticsChanging);
    EXPECT_EQ(v.difference->dimension, Dimension::State);
    EXPECT_NE(v.difference->render().find("retry_times"), std::string::npos);
}

TEST(Analyze, UnreachedChangeIsInconclusive) {
    auto pair = fixture_pair("cov_guarded_change");
    auto table = load_table_predictor(fixture_path("predictors/guard_false.json"));
    auto v = analyze(pair, EngineConfig{}, *table);
    EXPECT_EQ(v.classification, Classification::Inconclusive);
    EXPECT_TRUE(v.coverage.covered_changed_old.empty());
    EXPECT_TRUE(v.coverage.covered_changed_new.empty());
    EXPECT_DOUBLE_EQ(v.coverage.changed_old, 0.0);
    EXPECT_EQ(analyze(pair, EngineConfig{}, heuristic).classification, Classification::SemanticsChanging);
}

TEST(Analyze, AlwaysCrashingIsInconclusive) {
    auto pair = make_function_pair("def f(x):\n    return 1 + 'a'\n", "def f(x):\n    return 2 + 'a'\n");
    auto v = analyze(pair, with_k(50), heuristic);
    EXPECT_EQ(v.classification, Classification::Inconclusive);
    EXPECT_EQ(v.abstained_iterations, 50);
    EXPECT_FALSE(v.coverage.covered_changed_new.empty());
}

TEST(Coverage, UnreachedElseIsEightyPercent) {
    auto v = analyze(fixture_pair("cov_unreached_else"), EngineConfig{}, heuristic);
    EXPECT_EQ(v.coverage.code_lines_old, 10u);
    EXPECT_EQ(v.coverage.covered_old.size(), 8u);
    EXPECT_DOUBLE_EQ(v.coverage.overall, 0.8);
}

TEST(Coverage, StraightLineIsFull) {
    const char* src = "def f(a):\n    # note\n    b = a\n\n    return b\n";
    auto v = analyze(make_function_pair(src, src), with_k(5), heuristic);
    EXPECT_EQ(v.coverage.code_lines_old, 3u);
    EXPECT_DOUBLE_EQ(v.coverage.overall, 1.0);
    EXPECT_DOUBLE_EQ(v.coverage.changed_old, 1.0);
}

TEST(Coverage, MonotoneInIterations) {
    auto pair = fixture_pair("id_parse_port");
    Verdict prev = analyze(pair, with_k(1), heuristic);
    for (int k = 2; k <= 40; ++k) {
        Verdict cur = analyze(pair, with_k(k), heuristic);
        EXPECT_TRUE(subset(prev.coverage.covered_old, cur.coverage.covered_old)) << k;
        EXPECT_TRUE(subset(prev.coverage.covered_new, cur.coverage.covered_new)) << k;
        EXPECT_LE(prev.coverage.overall, cur.coverage.overall) << k;
        prev = cur;
    }
}

TEST(Properties, EarlyExitImpliesChanging) {
    for (const auto& f : testsupport::corpus()) {
        auto pair = build_pair(f);
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            auto v = analyze(pair, with_k(60, seed), heuristic);
            if (v.iterations_run < 60) EXPECT_EQ(v.classification, Classification::SemanticsChanging) << f.id;
            EXPECT_EQ(v.difference.has_value(), v.classification == Classification::SemanticsChanging) << f.id;
        }
    }
}

TEST(Properties, BudgetMonotonicity) {
    for (const char* id : {"categorical_dtype", "param_allowed", "retry_meta"}) {
        auto pair = fixture_pair(id);
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            auto full = analyze(pair, with_k(300, seed), heuristic);
            for (int k : {1, 2, 5, 20, 100}) {
                auto cut = analyze(pair, with_k(k, seed), heuristic);
                bool found = full.difference && full.iterations_run <= k;
                EXPECT_EQ(cut.classification == Classification::SemanticsChanging, found) << id << " " << k;
                if (found) EXPECT_EQ(cut.difference, full.difference);
            }
        }
    }
}

TEST(Properties, Determinism) {
    for (const char* id : {"retry_meta", "categorical_dtype", "id_close_spider", "rn_cache_lookup"}) {
        auto pair = fixture_pair(id);
        auto a = analyze(pair, with_k(300, 42), heuristic);
        auto b = analyze(fixture_pair(id), with_k(300, 42), heuristic);
        EXPECT_EQ(a.classification, b.classification);
        EXPECT_EQ(a.iterations_run, b.iterations_run);
        EXPECT_EQ(a.abstained_iterations, b.abstained_iterations);
        EXPECT_EQ(a.difference, b.difference);
        EXPECT_EQ(a.coverage.covered_old, b.coverage.covered_old);
        EXPECT_EQ(a.coverage.covered_new, b.coverage.covered_new);
    }
}

TEST(Seeds, DistinctPerIteration) {
    std::set<std::uint64_t> seen;
    for (int i = 1; i <= 1000; ++i) seen.insert(iteration_seed(7, i));
    EXPECT_EQ(seen.size(), 1000u);
    EXPECT_NE(iteration_seed(0, 1), iteration_seed(1, 1));
}

TEST(Batch, ParallelMatchesSerial) {
    std::vector<FunctionPair> pairs;
    for (const auto& f : testsupport::corpus()) pairs.push_back(build_pair(f));
    auto cfg = with_k(100, 3);
    auto serial = analyze_batch_serial(pairs, cfg, heuristic);
    for (int jobs : {1, 4}) {
        auto parallel = analyze_batch(pairs, cfg, heuristic, jobs);
        ASSERT_EQ(parallel.size(), serial.size());
        for (std::size_t i = 0; i < serial.size(); ++i) {
            EXPECT_EQ(parallel[i].classification, serial[i].classification) << i;
            EXPECT_EQ(parallel[i].iterations_run, serial[i].iterations_run) << i;
            EXPECT_EQ(parallel[i].difference, serial[i].difference) << i;
            EXPECT_EQ(parallel[i].coverage.covered_old, serial[i].coverage.covered_old) << i;
        }
    }
}

TEST(Batch, FailureSurfacesAfterRegion) {
    std::vector<FunctionPair> pairs{fixture_pair("id_clamp"), FunctionPair{}};
    EXPECT_THROW(analyze_batch(pairs, with_k(5), heuristic, 2), MergeError);
    EXPECT_THROW(analyze_batch_serial(pairs, with_k(5), heuristic), MergeError);
}
