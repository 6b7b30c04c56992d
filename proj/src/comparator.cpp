#include "pairguard/comparator.hpp"

#include <set>

namespace pairguard {

const char* to_string(Status s) {
    switch (s) {
        case Status::Difference: return "difference";
        case Status::Equivalent: return "equivalent";
        case Status::Abstain: return "abstain";
    }
    return "?";
}

const char* to_string(Dimension d) {
    switch (d) {
        case Dimension::State: return "state";
        case Dimension::Output: return "output";
        case Dimension::Calls: return "calls";
        case Dimension::Exception: return "exception";
    }
    return "?";
}

std::string Difference::render() const {
    std::string out = std::string("dimension: ") + to_string(dimension) + "\n";
    out += "location: " + location + "\n";
    out += "old: " + old_evidence + "\n";
    out += "new: " + new_evidence + "\n";
    out += "inputs:";
    if (inputs.empty()) out += " (none)";
    out += "\n";
    for (const auto& [path, value] : inputs) out += "  " + path + " = " + value + "\n";
    return out;
}

Value unwrap_return(const Value& v, int cap) {
    auto g = as_obj<GeneratorObj>(v);
    if (!g) return v;
    std::vector<Value> items;
    while (static_cast<int>(items.size()) < cap) {
        auto next = (*g)->next();
        if (!next) break;
        items.push_back(std::move(*next));
    }
    return make_list(std::move(items));
}

namespace {

std::string describe_end(const ExecutionOutcome& o) {
    if (o.exception) return o.exception->render();
    return "returned " + o.return_value.value_or("None");
}

std::string quoted(const std::string& text) { return serialize(Value{text}); }

}  // namespace

IterationResult compare(const ExecutionOutcome& o, const ExecutionOutcome& n,
                        const std::vector<std::pair<std::string, std::string>>& inputs) {
    auto differ = [&](Dimension d, std::string location, std::string a, std::string b) {
        return IterationResult{Status::Difference,
                               Difference{d, std::move(location), std::move(a), std::move(b), inputs}};
    };

    bool old_crash = o.exception && !o.exception->intentional;
    bool new_crash = n.exception && !n.exception->intentional;
    if (old_crash || new_crash) return {Status::Abstain, std::nullopt};

    if (o.exception || n.exception) {
        if (!o.exception || !n.exception || o.exception->type_name != n.exception->type_name ||
            o.exception->args != n.exception->args) {
            return differ(Dimension::Exception, "exception", describe_end(o), describe_end(n));
        }
    }

    if (o.return_value != n.return_value) {
        return differ(Dimension::State, "return value", o.return_value.value_or("<none>"),
                      n.return_value.value_or("<none>"));
    }
    if (o.probe != n.probe) {
        return differ(Dimension::State, "result of calling the returned function", o.probe.value_or("<none>"),
                      n.probe.value_or("<none>"));
    }

    std::set<std::string> paths;
    for (const auto& [p, v] : o.injected_state) paths.insert(p);
    for (const auto& [p, v] : n.injected_state) paths.insert(p);
    for (const auto& p : paths) {
        auto a = o.injected_state.find(p);
        auto b = n.injected_state.find(p);
        std::string va = a == o.injected_state.end() ? "<absent>" : a->second;
        std::string vb = b == n.injected_state.end() ? "<absent>" : b->second;
        if (va != vb) return differ(Dimension::State, "injected state at " + p, va, vb);
    }

    if (o.stdout_text != n.stdout_text) {
        return differ(Dimension::Output, "stdout", quoted(o.stdout_text), quoted(n.stdout_text));
    }
    if (o.stderr_text != n.stderr_text) {
        return differ(Dimension::Output, "stderr", quoted(o.stderr_text), quoted(n.stderr_text));
    }

    std::size_t calls = std::max(o.call_log.size(), n.call_log.size());
    for (std::size_t i = 0; i < calls; ++i) {
        const CallLogEntry* a = i < o.call_log.size() ? &o.call_log[i] : nullptr;
        const CallLogEntry* b = i < n.call_log.size() ? &n.call_log[i] : nullptr;
        if (a && b && *a == *b) continue;
        return differ(Dimension::Calls, "call " + std::to_string(i + 1), a ? a->render() : "<no call>",
                      b ? b->render() : "<no call>");
    }
    return {Status::Equivalent, std::nullopt};
}

}  // namespace pairguard
