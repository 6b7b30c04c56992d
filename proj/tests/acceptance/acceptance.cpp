// Runs every acceptance criterion and prints one PASS/FAIL line for each.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <json.hpp>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../support/fixtures.hpp"
#include "../support/value_gen.hpp"
#include "pairguard/cli.hpp"
#include "pairguard/concretize.hpp"
#include "pairguard/driver.hpp"
#include "pairguard/engine.hpp"

using namespace pairguard;
using testsupport::fixture_pair;
using testsupport::fixture_path;

namespace {

constexpr int kSeeds = 100;
constexpr double kRunLimitMs = 10000.0;

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

HeuristicPredictor heuristic;

EngineConfig seeded(std::uint64_t seed) {
    EngineConfig c;
    c.seed = seed;
    return c;
}

std::vector<PairFile> with_prefix(const std::string& prefix) {
    std::vector<PairFile> out;
    for (auto& f : testsupport::corpus()) {
        if (f.id.rfind(prefix, 0) == 0) out.push_back(std::move(f));
    }
    return out;
}

// ---- 1 ----------------------------------------------------------------------

Outcome reference_verdicts() {
    struct Case {
        const char* id;
        std::shared_ptr<const Predictor> predictor;
        std::function<bool(const Verdict&)> ok;
    };
    auto changing = [](const Verdict& v) { return v.classification == Classification::SemanticsChanging; };
    auto retry_table = load_table_predictor(fixture_path("predictors/retry.json"));
    auto shared_heuristic = std::make_shared<HeuristicPredictor>();
    std::vector<Case> cases{
        {"retry_meta", retry_table,
         [&](const Verdict& v) {
             return changing(v) && v.difference->dimension == Dimension::State &&
                    v.difference->render().find("retry_times") != std::string::npos;
         }},
        {"magic_fstring", shared_heuristic,
         [&](const Verdict& v) { return changing(v) && v.difference->dimension == Dimension::Exception; }},
        {"categorical_dtype", shared_heuristic,
         [&](const Verdict& v) {
             return changing(v) &&
                    (v.difference->dimension == Dimension::Calls || v.difference->dimension == Dimension::State);
         }},
        {"param_allowed", shared_heuristic,
         [&](const Verdict& v) {
             return changing(v) && v.difference->location == "return value" &&
                    v.difference->old_evidence == "True" && v.difference->new_evidence == "False";
         }},
    };
    bool pass = true;
    std::string detail;
    double worst = 0.0;
    for (const auto& c : cases) {
        auto pair = fixture_pair(c.id);
        int good = 0;
        for (int s = 0; s < kSeeds; ++s) {
            Verdict v = analyze(pair, seeded(static_cast<std::uint64_t>(s)), *c.predictor);
            worst = std::max(worst, v.wall_time_ms);
            if (c.ok(v)) ++good;
        }
        pass = pass && good >= 95;
        detail += std::string(c.id) + " " + std::to_string(good) + "/100, ";
    }
    pass = pass && worst <= kRunLimitMs;

    // informational: the retry pair under the heuristic predictor
    auto retry = fixture_pair("retry_meta");
    int h_changing = 0;
    int h_state = 0;
    for (int s = 0; s < kSeeds; ++s) {
        Verdict v = analyze(retry, seeded(static_cast<std::uint64_t>(s)), heuristic);
        if (changing(v)) ++h_changing;
        if (changing(v) && v.difference->dimension == Dimension::State) ++h_state;
    }
    detail += "slowest run " + fmt("%.1f ms", worst) + "; retry_meta with heuristic predictor " +
              std::to_string(h_changing) + "/100 changing, " + std::to_string(h_state) + "/100 via state";
    return {pass, detail};
}

// ---- 2, 3 ---------------------------------------------------------------------

Outcome all_preserving(const std::vector<PairFile>& files, std::size_t expected, bool drop_renames,
                       int* diverging = nullptr) {
    bool pass = files.size() == expected;
    int good = 0;
    int total = 0;
    double worst = 0.0;
    for (const auto& f : files) {
        auto pair = build_pair(f);
        for (int s = 0; s < kSeeds; ++s) {
            Verdict v = analyze(pair, seeded(static_cast<std::uint64_t>(s)), heuristic);
            ++total;
            worst = std::max(worst, v.wall_time_ms);
            if (v.classification == Classification::LikelySemanticsPreserving && v.iterations_run == 300) ++good;
        }
        if (drop_renames && diverging) {
            PairFile plain = f;
            plain.renames.clear();
            if (analyze(build_pair(plain), seeded(0), heuristic).classification == Classification::SemanticsChanging) {
                ++*diverging;
            }
        }
    }
    pass = pass && good == total && worst <= kRunLimitMs;
    return {pass, std::to_string(files.size()) + " pairs, " + std::to_string(good) + "/" + std::to_string(total) +
                      " runs preserving at k=300, slowest " + fmt("%.1f ms", worst)};
}

Outcome identity_suite() { return all_preserving(with_prefix("id_"), 20, false); }

Outcome rename_suite() {
    auto files = with_prefix("rn_");
    bool mapped = std::all_of(files.begin(), files.end(), [](const PairFile& f) { return !f.renames.empty(); });
    int diverging = 0;
    Outcome o = all_preserving(files, 10, true, &diverging);
    o.pass = o.pass && mapped;
    o.detail += "; without rename maps " + std::to_string(diverging) + "/" + std::to_string(files.size()) + " diverge";
    return o;
}

// ---- 4 ------------------------------------------------------------------------

Outcome non_interference() {
    testsupport::ValueGen gen(2024);
    int failures = 0;
    int mutations = 0;
    for (int i = 0; i < 1000; ++i) {
        Value v = gen.value(4);
        std::string before = serialize(v);
        Value copy = deep_copy(v);
        if (serialize(copy) != before) ++failures;
        for (int m = 0, n = 1 + static_cast<int>(gen.rng()() % 10); m < n; ++m, ++mutations) gen.mutate(copy);
        if (serialize(v) != before) ++failures;
    }
    return {failures == 0, "1000 values, " + std::to_string(mutations) + " mutations, " + std::to_string(failures) +
                               " failures"};
}

// ---- 5 ------------------------------------------------------------------------

std::string strip_timing(const std::string& jsonl) {
    std::istringstream in(jsonl);
    std::string out;
    for (std::string line; std::getline(in, line);) {
        auto j = nlohmann::json::parse(line);
        j.erase("wall_time_ms");
        out += j.dump() + "\n";
    }
    return out;
}

std::string cli_json(const std::vector<std::string>& extra) {
    std::vector<std::string> args{"pairguard", "analyze", fixture_path("pairs"), "--format", "json", "--seed", "5"};
    args.insert(args.end(), extra.begin(), extra.end());
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    if (run_cli(static_cast<int>(argv.size()), argv.data(), out, err) != 0) return "error: " + err.str();
    return out.str();
}

Outcome determinism() {
    int mismatches = 0;
    int checked = 0;
    for (const auto& f : testsupport::corpus()) {
        for (std::uint64_t s = 0; s < 3; ++s) {
            Verdict a = analyze(build_pair(f), seeded(s), heuristic);
            Verdict b = analyze(build_pair(f), seeded(s), heuristic);
            ++checked;
            bool same = a.classification == b.classification && a.iterations_run == b.iterations_run &&
                        a.abstained_iterations == b.abstained_iterations && a.difference == b.difference &&
                        a.coverage.covered_old == b.coverage.covered_old &&
                        a.coverage.covered_new == b.coverage.covered_new;
            if (!same) ++mismatches;
        }
    }
    std::string first = cli_json({});
    std::string second = cli_json({});
    std::string parallel = cli_json({"--jobs", "2"});
    bool bytes = first.rfind("error", 0) != 0 && strip_timing(first) == strip_timing(second) &&
                 strip_timing(first) == strip_timing(parallel);
    return {mismatches == 0 && bytes, std::to_string(checked) + " repeated analyses, " + std::to_string(mismatches) +
                                          " mismatches; machine output " + (bytes ? "identical" : "differs")};
}

// ---- 6 ------------------------------------------------------------------------

Outcome coverage_analog() {
    auto files = testsupport::corpus();
    std::vector<double> overall;
    int conclusive = 0;
    for (const auto& f : files) {
        Verdict v = analyze(build_pair(f), EngineConfig{}, heuristic);
        overall.push_back(v.coverage.overall);
        if (v.classification != Classification::Inconclusive) ++conclusive;
    }
    std::sort(overall.begin(), overall.end());
    std::size_t n = overall.size();
    double median = n % 2 ? overall[n / 2] : (overall[n / 2 - 1] + overall[n / 2]) / 2.0;
    double share = static_cast<double>(conclusive) / static_cast<double>(n);
    bool pass = n >= 25 && median >= 0.8 && share >= 0.9;
    return {pass, std::to_string(n) + " pairs, median coverage " + fmt("%.3f", median) + ", non-inconclusive " +
                      std::to_string(conclusive) + "/" + std::to_string(n)};
}

// ---- 7 ------------------------------------------------------------------------

std::size_t container_size(const Value& v) {
    if (auto l = as_obj<ListObj>(v)) return (*l)->items.size();
    if (auto t = as_obj<TupleObj>(v)) return (*t)->items.size();
    if (auto d = as_obj<DictObj>(v)) return (*d)->items.size();
    if (auto s = as_obj<SetObj>(v)) return (*s)->items.size();
    return 0;
}

std::vector<Value> elements(const Value& v) {
    if (auto l = as_obj<ListObj>(v)) return (*l)->items;
    if (auto t = as_obj<TupleObj>(v)) return (*t)->items;
    std::vector<Value> out;
    if (auto d = as_obj<DictObj>(v)) {
        for (const auto& kv : (*d)->items) out.push_back(kv.second);
    }
    if (auto s = as_obj<SetObj>(v)) out = (*s)->items;
    return out;
}

Outcome concretizer_conformance() {
    StaticFacts facts = extract_static_facts(fixture_pair("retry_meta"));
    facts.literals_int.push_back(12345);
    ConcretizerConfig cfg = make_concretizer_config(facts);
    std::set<std::int64_t> allowed{-100, -10, -1, 0, 1, 10, 100};
    allowed.insert(facts.literals_int.begin(), facts.literals_int.end());

    Rng rng(77);
    int kind_errors = 0;
    int size_errors = 0;
    int pool_errors = 0;
    int nonempty = 0;
    int object_containers = 0;
    auto check_int = [&](const Value& v) {
        if (auto i = std::get_if<std::int64_t>(&v); i && !allowed.count(*i)) ++pool_errors;
    };
    for (int k = 0; k < kAbstractKindCount; ++k) {
        auto kind = static_cast<AbstractKind>(k);
        for (int i = 0; i < 10000; ++i) {
            Value v = concretize(kind, cfg, rng, "x");
            if (kind_of(v) != kind) ++kind_errors;
            if (kind == AbstractKind::Integer) check_int(v);
            bool container = kind == AbstractKind::List || kind == AbstractKind::Tuple ||
                             kind == AbstractKind::Dictionary || kind == AbstractKind::Set;
            if (!container) continue;
            if (container_size(v) > 4) ++size_errors;
            auto items = elements(v);
            for (const auto& e : items) check_int(e);
            if (!items.empty()) {
                ++nonempty;
                if (is_versatile(items.front())) ++object_containers;
            }
        }
    }
    double freq = static_cast<double>(object_containers) / static_cast<double>(nonempty);
    bool pass = kind_errors == 0 && size_errors == 0 && pool_errors == 0 && std::abs(freq - 0.5) <= 0.05;
    return {pass, "120000 samples, kind errors " + std::to_string(kind_errors) + ", size errors " +
                      std::to_string(size_errors) + ", pool errors " + std::to_string(pool_errors) +
                      ", element Object frequency " + fmt("%.3f", freq)};
}

// ---- 8 ------------------------------------------------------------------------

Outcome versatile_arithmetic() {
    auto make = [](std::uint64_t seed) {
        auto o = std::make_shared<VersatileObj>();
        o->seed = seed;
        return Value{o};
    };
    Value sum = versatile_binop(ast::BinaryOp::Add, make(1), std::int64_t{3});
    bool four = std::holds_alternative<std::int64_t>(sum) && std::get<std::int64_t>(sum) == 4;

    const ast::BinaryOp ops[] = {ast::BinaryOp::Add,      ast::BinaryOp::Sub, ast::BinaryOp::Mul, ast::BinaryOp::Div,
                                 ast::BinaryOp::FloorDiv, ast::BinaryOp::Mod, ast::BinaryOp::Pow};
    std::vector<Value> operands{NoneV{},          true,           false,          std::int64_t{0},
                                std::int64_t{3},  std::int64_t{-7}, std::int64_t{INT64_MAX}, std::int64_t{INT64_MIN},
                                0.0,              -2.5,           1e308,          std::string(""),
                                std::string("ab"), std::string("%s"), make_list({std::int64_t{1}}),
                                make_tuple({}),   make_dict(),    make_set(),     make(9),
                                make_exception("ValueError", {}, true), ExcClass{"KeyError"}};
    int checked = 0;
    int raised = 0;
    for (auto op : ops) {
        for (const auto& other : operands) {
            for (bool left : {true, false}) {
                ++checked;
                try {
                    if (left) versatile_binop(op, make(5), other);
                    else versatile_binop(op, other, make(5));
                } catch (const PyError&) {
                    ++raised;
                }
            }
        }
    }
    return {four && raised == 0, std::string("o + 3 = ") + serialize(sum) + ", " + std::to_string(checked) +
                                     " operator/operand combinations, " + std::to_string(raised) + " raised"};
}

// ---- 9 ------------------------------------------------------------------------

Outcome efficiency() {
    double worst_iteration = 0.0;
    double worst_analysis = 0.0;
    for (const auto& f : testsupport::corpus()) {
        FunctionPair pair = build_pair(f);
        StaticFacts facts = extract_static_facts(pair);
        ComparisonProgram program = merge_pair(pair);
        RunConfig run;
        run.concretizer = make_concretizer_config(facts);
        for (std::uint64_t s = 1; s <= 50; ++s) {
            auto t0 = std::chrono::steady_clock::now();
            run_iteration(program, facts, run, heuristic, s);
            double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
            worst_iteration = std::max(worst_iteration, ms);
        }
        EngineConfig full;
        Verdict v = analyze(pair, full, heuristic);
        worst_analysis = std::max(worst_analysis, v.wall_time_ms);
    }
    bool pass = worst_iteration <= 50.0 && worst_analysis <= kRunLimitMs;
    return {pass, "slowest iteration " + fmt("%.2f ms", worst_iteration) + ", slowest k=300 analysis " +
                      fmt("%.1f ms", worst_analysis)};
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        Outcome (*run)();
    };
    const Criterion criteria[] = {
        {"AC1 reference pair verdicts", reference_verdicts},
        {"AC2 identity suite", identity_suite},
        {"AC3 rename suite", rename_suite},
        {"AC4 non-interference", non_interference},
        {"AC5 determinism", determinism},
        {"AC6 coverage analog", coverage_analog},
        {"AC7 concretizer conformance", concretizer_conformance},
        {"AC8 versatile arithmetic", versatile_arithmetic},
        {"AC9 efficiency", efficiency},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        Outcome o = c.run();
        if (!o.pass) ++failed;
        std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
