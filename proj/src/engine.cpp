#include "pairguard/engine.hpp"

#include <functional>

#include "interpreter.hpp"

namespace pairguard {

const ConsistencyEntry* ConsistencyMap::find(const std::string& path) const {
    auto it = entries_.find(path);
    return it == entries_.end() ? nullptr : &it->second;
}

const ConsistencyEntry& ConsistencyMap::insert(const std::string& path, Value v_old) {
    auto [it, fresh] = entries_.try_emplace(path);
    if (fresh) {
        it->second.inserted = serialize(v_old);
        it->second.v_new = deep_copy(v_old);
        it->second.v_old = std::move(v_old);
        order_.push_back(path);
    }
    return it->second;
}

void ConsistencyMap::clear() {
    entries_.clear();
    order_.clear();
}

std::string CallLogEntry::render() const {
    std::string out = callee + "(";
    bool first = true;
    for (const auto& a : args) {
        if (!first) out += ", ";
        out += a;
        first = false;
    }
    for (const auto& [k, v] : kwargs) {
        if (!first) out += ", ";
        out += k + "=" + v;
        first = false;
    }
    out += ")";
    if (occurrence > 1) out += " #" + std::to_string(occurrence);
    return out;
}

std::string ExceptionInfo::render() const {
    return (intentional ? "raised " : "crashed with ") + type_name + args;
}

bool looks_like_exception_name(const std::string& name) {
    auto ends = [&](const char* suffix) {
        std::string s(suffix);
        return name.size() >= s.size() && name.compare(name.size() - s.size(), s.size(), s) == 0;
    };
    if (ends("Error") || ends("Exception") || ends("Warning")) return true;
    return name == "StopIteration" || name == "KeyboardInterrupt" || name == "SystemExit" || name == "GeneratorExit";
}

namespace {

void collect_handler_names(const ast::Block& block, std::set<std::string>& out) {
    for (const auto& s : block) {
        if (auto t = s->as<ast::Try>()) {
            for (const auto& h : t->handlers) {
                for (const auto& type : h.types) out.insert(detail::last_component(type));
                collect_handler_names(h.body, out);
            }
            collect_handler_names(t->body, out);
            collect_handler_names(t->orelse, out);
            collect_handler_names(t->finalbody, out);
        } else if (auto i = s->as<ast::If>()) {
            collect_handler_names(i->body, out);
            collect_handler_names(i->orelse, out);
        } else if (auto f = s->as<ast::For>()) {
            collect_handler_names(f->body, out);
        } else if (auto w = s->as<ast::While>()) {
            collect_handler_names(w->body, out);
        } else if (auto w = s->as<ast::With>()) {
            collect_handler_names(w->body, out);
        } else if (auto d = s->as<ast::FunctionDef>()) {
            collect_handler_names(d->body, out);
        }
    }
}

std::vector<std::string> trimmed_lines(const std::string& text) {
    std::vector<std::string> out = split_lines(text);
    for (auto& line : out) {
        auto a = line.find_first_not_of(" \t");
        auto b = line.find_last_not_of(" \t\r");
        line = a == std::string::npos ? std::string() : line.substr(a, b - a + 1);
    }
    return out;
}

}  // namespace

ComparisonProgram merge_pair(const FunctionPair& pair) {
    if (!pair.old_fn.def) throw MergeError("old function is missing");
    if (!pair.new_fn.def) throw MergeError("new function is missing");
    ComparisonProgram p;
    p.old_name = pair.old_fn.name + "_old";
    p.new_name = pair.new_fn.name + "_new";
    p.old_fn = pair.old_fn;
    p.new_fn = pair.new_fn;
    p.changed_old = pair.changed_lines_old;
    p.changed_new = pair.changed_lines_new;
    p.merger = NameMerger(pair.renames);
    collect_handler_names(p.old_fn.body(), p.handler_names);
    collect_handler_names(p.new_fn.body(), p.handler_names);
    p.old_lines = trimmed_lines(p.old_fn.source_text);
    p.new_lines = trimmed_lines(p.new_fn.source_text);
    return p;
}

ExecutionOutcome run_one(Side side, const ComparisonProgram& program, ConsistencyMap& cmap, const StaticFacts& facts,
                         const RunConfig& cfg, const Predictor& predictor, std::uint64_t iteration_seed) {
    detail::Interpreter interp(program, side, cmap, facts, cfg, predictor, iteration_seed);
    return interp.run();
}

IterationRun run_iteration(const ComparisonProgram& program, const StaticFacts& facts, const RunConfig& cfg,
                           const Predictor& predictor, std::uint64_t iteration_seed) {
    ConsistencyMap cmap;
    IterationRun r;
    r.old_outcome = run_one(Side::Old, program, cmap, facts, cfg, predictor, iteration_seed);
    r.new_outcome = run_one(Side::New, program, cmap, facts, cfg, predictor, iteration_seed);
    for (const auto& path : cmap.paths()) {
        const ConsistencyEntry* e = cmap.find(path);
        r.old_outcome.injected_state[path] = serialize(e->v_old);
        r.new_outcome.injected_state[path] = serialize(e->v_new);
        r.inputs.emplace_back(path, e->inserted);
    }
    return r;
}

}  // namespace pairguard
