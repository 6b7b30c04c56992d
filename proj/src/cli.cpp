#include "pairguard/cli.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "pairguard/engine.hpp"
#include "pairguard/lexer.hpp"
#include "pairguard/predictor.hpp"

namespace pairguard {

namespace fs = std::filesystem;
using nlohmann::json;

PairFile parse_pair_file(std::string_view json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw PairError(std::string("malformed pair file: ") + e.what());
    }
    if (!j.is_object()) throw PairError("pair file must hold a JSON object");
    auto text_field = [&](const char* key) {
        auto it = j.find(key);
        if (it == j.end() || !it->is_string()) throw PairError(std::string("missing string field '") + key + "'");
        return it->get<std::string>();
    };
    PairFile f;
    f.id = text_field("id");
    f.old_source = text_field("old");
    f.new_source = text_field("new");
    if (auto it = j.find("renames"); it != j.end() && !it->is_null()) {
        if (!it->is_object()) throw PairError("'renames' must be an object");
        for (const auto& [from, to] : it->items()) {
            if (!to.is_string()) throw PairError("rename target for '" + from + "' must be a string");
            f.renames[from] = to.get<std::string>();
        }
    }
    if (auto it = j.find("entry"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) throw PairError("'entry' must be a string");
        f.entry = it->get<std::string>();
    }
    return f;
}

PairFile load_pair_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw PairError("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_pair_file(buf.str());
}

FunctionPair build_pair(const PairFile& file) {
    FunctionPair pair = make_function_pair(file.old_source, file.new_source, file.renames);
    if (file.entry) {
        for (const auto* fn : {&pair.old_fn, &pair.new_fn}) {
            if (fn->name != *file.entry) {
                throw PairError("entry '" + *file.entry + "' not found (function is '" + fn->name + "')");
            }
        }
    }
    return pair;
}

std::vector<std::string> expand_inputs(const std::vector<std::string>& paths) {
    std::vector<std::string> out;
    for (const auto& p : paths) {
        std::error_code ec;
        if (!fs::is_directory(p, ec)) {
            out.push_back(p);
            continue;
        }
        std::vector<std::string> files;
        for (const auto& e : fs::directory_iterator(p)) {
            if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path().string());
        }
        std::sort(files.begin(), files.end());
        out.insert(out.end(), files.begin(), files.end());
    }
    return out;
}

namespace {

json coverage_json(const CoverageReport& c) {
    return json{{"changed_old", c.changed_old},
                {"changed_new", c.changed_new},
                {"overall", c.overall},
                {"covered_old", c.covered_old},
                {"covered_new", c.covered_new}};
}

std::string fixed2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

}  // namespace

std::string verdict_json(const std::string& id, const Verdict& v) {
    json j{{"id", id},
           {"verdict", to_string(v.classification)},
           {"iterations", v.iterations_run},
           {"coverage", coverage_json(v.coverage)},
           {"wall_time_ms", v.wall_time_ms}};
    if (v.difference) {
        const Difference& d = *v.difference;
        json inputs = json::array();
        for (const auto& [path, value] : d.inputs) inputs.push_back(json{{"path", path}, {"value", value}});
        j["difference"] = json{{"dimension", to_string(d.dimension)},
                               {"location", d.location},
                               {"old", d.old_evidence},
                               {"new", d.new_evidence},
                               {"inputs", inputs}};
    }
    return j.dump();
}

std::string verdict_text(const std::string& id, const Verdict& v) {
    std::string out = "== " + id + "\n";
    out += std::string("verdict: ") + to_string(v.classification) + "\n";
    out += "iterations: " + std::to_string(v.iterations_run) + " (abstained " +
           std::to_string(v.abstained_iterations) + ")\n";
    out += "coverage: changed old " + fixed2(v.coverage.changed_old) + ", changed new " +
           fixed2(v.coverage.changed_new) + ", overall " + fixed2(v.coverage.overall) + "\n";
    if (v.difference) {
        std::istringstream lines(v.difference->render());
        for (std::string line; std::getline(lines, line);) out += "  " + line + "\n";
    }
    return out;
}

namespace {

struct Job {
    std::string path;
    std::string id;
    std::optional<FunctionPair> pair;
    std::string error;
};

Job prepare(const std::string& path) {
    Job job{path, fs::path(path).stem().string(), std::nullopt, {}};
    try {
        PairFile f = load_pair_file(path);
        job.id = f.id;
        job.pair = build_pair(f);
    } catch (const PairError& e) {
        job.error = e.what();
    } catch (const SyntaxError& e) {
        job.error = std::string("syntax error: ") + e.what();
    }
    return job;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Differential checker for pairs of function versions"};
    app.require_subcommand(1);
    auto* analyze_cmd = app.add_subcommand("analyze", "Analyze pair files or directories of pair files");

    EngineConfig cfg;
    std::vector<std::string> inputs;
    std::string predictor_spec = "heuristic";
    std::string format = "text";
    std::string out_path;
    int jobs = 1;
    analyze_cmd->add_option("inputs", inputs, "Pair files or directories")->required();
    analyze_cmd->add_option("--max-iterations", cfg.max_iterations, "Iteration limit k")->capture_default_str();
    analyze_cmd->add_option("--seed", cfg.seed, "Base seed")->capture_default_str();
    analyze_cmd->add_option("--exception-probability", cfg.exception_probability)->capture_default_str();
    analyze_cmd->add_option("--max-structure-size", cfg.max_structure_size)->capture_default_str();
    analyze_cmd->add_option("--object-bias", cfg.object_bias)->capture_default_str();
    analyze_cmd->add_option("--predictor", predictor_spec, "heuristic or table:<path>")->capture_default_str();
    analyze_cmd->add_option("--format", format)->check(CLI::IsMember({"text", "json"}))->capture_default_str();
    analyze_cmd->add_option("--out", out_path, "Write results to a file");
    analyze_cmd->add_option("--jobs", jobs, "Pairs analyzed in parallel")->check(CLI::PositiveNumber)
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "pairguard: " << e.what() << "\n";
        return 2;
    }

    std::shared_ptr<const Predictor> predictor;
    try {
        validate(cfg);
        predictor = make_predictor(predictor_spec);
    } catch (const ConfigError& e) {
        err << "pairguard: " << e.what() << "\n";
        return 2;
    } catch (const FormatError& e) {
        err << "pairguard: " << e.what() << "\n";
        return 2;
    }

    std::ofstream file_out;
    if (!out_path.empty()) {
        file_out.open(out_path, std::ios::binary);
        if (!file_out) {
            err << "pairguard: cannot write " << out_path << "\n";
            return 2;
        }
    }
    std::ostream& sink = out_path.empty() ? out : file_out;
    bool json_format = format == "json";

    std::vector<std::string> paths = expand_inputs(inputs);
    if (paths.empty()) {
        err << "pairguard: no pair files found\n";
        return 2;
    }
    std::vector<Job> work;
    work.reserve(paths.size());
    for (const auto& p : paths) work.push_back(prepare(p));

    bool failed = false;
    auto emit = [&](const Job& job, const Verdict* v) {
        if (!v) {
            err << "pairguard: " << job.path << ": " << job.error << "\n";
            failed = true;
            return;
        }
        sink << (json_format ? verdict_json(job.id, *v) + "\n" : verdict_text(job.id, *v));
        sink.flush();
    };

    auto n = static_cast<std::ptrdiff_t>(work.size());
#pragma omp parallel for ordered schedule(dynamic, 1) num_threads(jobs)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        Job& job = work[static_cast<std::size_t>(i)];
        std::optional<Verdict> verdict;
        if (job.pair) {
            try {
                verdict = analyze(*job.pair, cfg, *predictor);
            } catch (const MergeError& e) {
                job.error = e.what();
            }
        }
#pragma omp ordered
        emit(job, verdict ? &*verdict : nullptr);
    }
    return failed ? 2 : 0;
}

}  // namespace pairguard
