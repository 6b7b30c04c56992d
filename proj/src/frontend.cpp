#include "pairguard/frontend.hpp"

#include <algorithm>
#include <functional>

#include "pairguard/printer.hpp"

namespace pairguard {

using namespace ast;

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.emplace_back(line);
        start = end + 1;
    }
    if (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

namespace {

std::string normalize(std::string_view line) {
    std::string out;
    bool pending_space = false;
    for (char c : line) {
        if (c == ' ' || c == '\t') {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out += ' ';
        pending_space = false;
        out += c;
    }
    return out;
}

}  // namespace

bool is_code_line(std::string_view line) {
    for (char c : line) {
        if (c == ' ' || c == '\t' || c == '\r' || c == '\f') continue;
        return c != '#';
    }
    return false;
}

std::set<int> code_lines(std::string_view text) {
    std::set<int> out;
    auto lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (is_code_line(lines[i])) out.insert(static_cast<int>(i) + 1);
    }
    return out;
}

std::pair<std::set<int>, std::set<int>> diff_changed_lines(std::string_view old_text,
                                                           std::string_view new_text) {
    struct Line {
        int number;
        std::string text;
    };
    auto collect = [](std::string_view text) {
        std::vector<Line> out;
        auto lines = split_lines(text);
        for (std::size_t i = 0; i < lines.size(); ++i) {
            if (is_code_line(lines[i])) out.push_back({static_cast<int>(i) + 1, normalize(lines[i])});
        }
        return out;
    };
    auto a = collect(old_text);
    auto b = collect(new_text);
    const std::size_t n = a.size();
    const std::size_t m = b.size();

    // Suffix LCS table; the backtrack prefers matching as early as possible.
    std::vector<std::vector<int>> lcs(n + 1, std::vector<int>(m + 1, 0));
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t j = m; j-- > 0;) {
            lcs[i][j] = a[i].text == b[j].text ? lcs[i + 1][j + 1] + 1 : std::max(lcs[i + 1][j], lcs[i][j + 1]);
        }
    }
    std::set<int> old_changed;
    std::set<int> new_changed;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < n && j < m) {
        if (a[i].text == b[j].text) {
            ++i;
            ++j;
        } else if (lcs[i + 1][j] >= lcs[i][j + 1]) {
            old_changed.insert(a[i++].number);
        } else {
            new_changed.insert(b[j++].number);
        }
    }
    for (; i < n; ++i) old_changed.insert(a[i].number);
    for (; j < m; ++j) new_changed.insert(b[j].number);
    return {old_changed, new_changed};
}

NameMerger::NameMerger(const std::map<std::string, std::string>& renames) {
    for (const auto& [from, to] : renames) {
        std::string merged = from + "_renamed_" + to;
        old_to_merged_[from] = merged;
        new_to_merged_[to] = merged;
    }
}

const std::string& NameMerger::merge(const std::string& name, Side side) const {
    const auto& table = side == Side::Old ? old_to_merged_ : new_to_merged_;
    auto it = table.find(name);
    return it == table.end() ? name : it->second;
}

std::string callee_path(const Expr& func, const NameMerger& merger, Side side) {
    if (auto n = func.as<Name>()) return merger.merge(n->id, side);
    if (auto a = func.as<Attribute>()) return callee_path(*a->value, merger, side) + "." + merger.merge(a->attr, side);
    return render_expr(func, [&](const std::string& id) { return merger.merge(id, side); });
}

namespace {

// Generic pre-order traversal over statements and expressions.
struct Walker {
    std::function<void(const Expr&)> on_expr;
    std::function<void(const Stmt&)> on_stmt_enter;
    std::function<void(const Stmt&)> on_stmt_exit;

    void expr(const Expr* e) {
        if (!e) return;
        on_expr(*e);
        std::visit(
            [&](const auto& node) {
                using T = std::decay_t<decltype(node)>;
                if constexpr (std::is_same_v<T, FString>) {
                    for (const auto& p : node.parts) expr(p.expr.get());
                } else if constexpr (std::is_same_v<T, ListExpr> || std::is_same_v<T, TupleExpr> ||
                                     std::is_same_v<T, SetExpr>) {
                    for (const auto& x : node.elts) expr(x.get());
                } else if constexpr (std::is_same_v<T, DictExpr>) {
                    for (std::size_t i = 0; i < node.keys.size(); ++i) {
                        expr(node.keys[i].get());
                        expr(node.values[i].get());
                    }
                } else if constexpr (std::is_same_v<T, ListComp> || std::is_same_v<T, GeneratorExp>) {
                    expr(node.elt.get());
                    for (const auto& g : node.generators) {
                        expr(g.target.get());
                        expr(g.iter.get());
                        for (const auto& c : g.ifs) expr(c.get());
                    }
                } else if constexpr (std::is_same_v<T, Lambda>) {
                    for (const auto& p : node.params) expr(p.default_value.get());
                    expr(node.body.get());
                } else if constexpr (std::is_same_v<T, IfExp>) {
                    expr(node.test.get());
                    expr(node.body.get());
                    expr(node.orelse.get());
                } else if constexpr (std::is_same_v<T, BoolOpExpr>) {
                    for (const auto& x : node.values) expr(x.get());
                } else if constexpr (std::is_same_v<T, Compare>) {
                    expr(node.left.get());
                    for (const auto& x : node.comparators) expr(x.get());
                } else if constexpr (std::is_same_v<T, BinOp>) {
                    expr(node.left.get());
                    expr(node.right.get());
                } else if constexpr (std::is_same_v<T, UnaryOpExpr>) {
                    expr(node.operand.get());
                } else if constexpr (std::is_same_v<T, Call>) {
                    expr(node.func.get());
                    for (const auto& x : node.args) expr(x.get());
                    for (const auto& k : node.keywords) expr(k.value.get());
                } else if constexpr (std::is_same_v<T, Attribute>) {
                    expr(node.value.get());
                } else if constexpr (std::is_same_v<T, Subscript>) {
                    expr(node.value.get());
                    expr(node.index.get());
                } else if constexpr (std::is_same_v<T, Slice>) {
                    expr(node.lower.get());
                    expr(node.upper.get());
                } else if constexpr (std::is_same_v<T, Yield>) {
                    expr(node.value.get());
                }
            },
            e->node);
    }

    void block(const Block& b) {
        for (const auto& s : b) stmt(*s);
    }

    void stmt(const Stmt& s) {
        if (on_stmt_enter) on_stmt_enter(s);
        std::visit(
            [&](const auto& node) {
                using T = std::decay_t<decltype(node)>;
                if constexpr (std::is_same_v<T, FunctionDef>) {
                    for (const auto& p : node.params) expr(p.default_value.get());
                    block(node.body);
                } else if constexpr (std::is_same_v<T, Assign>) {
                    for (const auto& t : node.targets) expr(t.get());
                    expr(node.value.get());
                } else if constexpr (std::is_same_v<T, AugAssign>) {
                    expr(node.target.get());
                    expr(node.value.get());
                } else if constexpr (std::is_same_v<T, Return>) {
                    expr(node.value.get());
                } else if constexpr (std::is_same_v<T, Raise>) {
                    expr(node.exc.get());
                    expr(node.cause.get());
                } else if constexpr (std::is_same_v<T, Assert>) {
                    expr(node.test.get());
                    expr(node.msg.get());
                } else if constexpr (std::is_same_v<T, If>) {
                    expr(node.test.get());
                    block(node.body);
                    block(node.orelse);
                } else if constexpr (std::is_same_v<T, For>) {
                    expr(node.target.get());
                    expr(node.iter.get());
                    block(node.body);
                } else if constexpr (std::is_same_v<T, While>) {
                    expr(node.test.get());
                    block(node.body);
                } else if constexpr (std::is_same_v<T, Try>) {
                    block(node.body);
                    for (const auto& h : node.handlers) block(h.body);
                    block(node.orelse);
                    block(node.finalbody);
                } else if constexpr (std::is_same_v<T, With>) {
                    for (const auto& item : node.items) {
                        expr(item.context.get());
                        expr(item.target.get());
                    }
                    block(node.body);
                } else if constexpr (std::is_same_v<T, ExprStmt>) {
                    expr(node.value.get());
                }
            },
            s.node);
        if (on_stmt_exit) on_stmt_exit(s);
    }
};

void add_class_names(const Expr& e, std::set<std::string>& out) {
    if (auto t = e.as<TupleExpr>()) {
        for (const auto& x : t->elts) add_class_names(*x, out);
        return;
    }
    if (e.as<Name>() || e.as<Attribute>()) out.insert(render_expr(e));
}

void collect_facts(const SourceFunction& fn, const NameMerger& merger, Side side, StaticFacts& facts) {
    // Exception types of the try statements whose body encloses the cursor.
    std::vector<std::set<std::string>> caught;
    Walker w;
    w.on_expr = [&](const Expr& e) {
        if (auto i = e.as<IntLit>()) facts.literals_int.push_back(i->value);
        if (auto f = e.as<FloatLit>()) facts.literals_float.push_back(f->value);
        if (auto s = e.as<StrLit>()) facts.literals_str.push_back(s->value);
        auto call = e.as<Call>();
        if (!call) return;
        if (auto n = call->func->as<Name>(); n && n->id == "isinstance" && call->args.size() == 2) {
            add_class_names(*call->args[1], facts.isinstance_classes);
        }
        std::set<std::string> types;
        for (const auto& level : caught) types.insert(level.begin(), level.end());
        if (!types.empty()) {
            auto& entry = facts.call_exception_map[callee_path(*call->func, merger, side)];
            entry.insert(types.begin(), types.end());
        }
    };
    // Handlers only guard the try body, so the set is pushed around that block.
    std::function<void(const Stmt&)> visit = [&](const Stmt& s) {
        auto t = s.as<Try>();
        if (!t) {
            if (auto f = s.as<FunctionDef>()) {
                for (const auto& p : f->params) w.expr(p.default_value.get());
                for (const auto& b : f->body) visit(*b);
                return;
            }
            if (auto i = s.as<If>()) {
                w.expr(i->test.get());
                for (const auto& b : i->body) visit(*b);
                for (const auto& b : i->orelse) visit(*b);
                return;
            }
            if (auto f = s.as<For>()) {
                w.expr(f->target.get());
                w.expr(f->iter.get());
                for (const auto& b : f->body) visit(*b);
                return;
            }
            if (auto wh = s.as<While>()) {
                w.expr(wh->test.get());
                for (const auto& b : wh->body) visit(*b);
                return;
            }
            if (auto with = s.as<With>()) {
                for (const auto& item : with->items) {
                    w.expr(item.context.get());
                    w.expr(item.target.get());
                }
                for (const auto& b : with->body) visit(*b);
                return;
            }
            w.stmt(s);
            return;
        }
        std::set<std::string> types;
        for (const auto& h : t->handlers) types.insert(h.types.begin(), h.types.end());
        caught.push_back(std::move(types));
        for (const auto& b : t->body) visit(*b);
        caught.pop_back();
        for (const auto& h : t->handlers) {
            for (const auto& b : h.body) visit(*b);
        }
        for (const auto& b : t->orelse) visit(*b);
        for (const auto& b : t->finalbody) visit(*b);
    };
    visit(*fn.def);
}

void collect_identifiers(const SourceFunction& fn, std::set<std::string>& out) {
    Walker w;
    w.on_expr = [&](const Expr& e) {
        if (auto n = e.as<Name>()) out.insert(n->id);
        if (auto a = e.as<Attribute>()) out.insert(a->attr);
        if (auto c = e.as<Call>()) {
            for (const auto& k : c->keywords) out.insert(k.name);
        }
        if (auto l = e.as<Lambda>()) {
            for (const auto& p : l->params) out.insert(p.name);
        }
    };
    w.on_stmt_enter = [&](const Stmt& s) {
        if (auto f = s.as<FunctionDef>()) {
            out.insert(f->name);
            for (const auto& p : f->params) out.insert(p.name);
        }
        if (auto t = s.as<Try>()) {
            for (const auto& h : t->handlers) {
                if (!h.name.empty()) out.insert(h.name);
            }
        }
    };
    w.stmt(*fn.def);
}

}  // namespace

FunctionPair make_function_pair(std::string_view old_source, std::string_view new_source,
                       std::map<std::string, std::string> renames) {
    FunctionPair pair;
    pair.old_fn = parse_function(old_source);
    pair.new_fn = parse_function(new_source);

    std::set<std::string> old_ids;
    std::set<std::string> new_ids;
    collect_identifiers(pair.old_fn, old_ids);
    collect_identifiers(pair.new_fn, new_ids);
    std::set<std::string> targets;
    for (const auto& [from, to] : renames) {
        if (!old_ids.count(from)) throw PairError("rename source '" + from + "' does not occur in the old function");
        if (!new_ids.count(to)) throw PairError("rename target '" + to + "' does not occur in the new function");
        if (!targets.insert(to).second) throw PairError("rename target '" + to + "' is used twice");
    }
    pair.renames = std::move(renames);

    auto [old_changed, new_changed] = diff_changed_lines(pair.old_fn.source_text, pair.new_fn.source_text);
    pair.changed_lines_old = std::move(old_changed);
    pair.changed_lines_new = std::move(new_changed);
    return pair;
}

StaticFacts extract_static_facts(const FunctionPair& pair) {
    StaticFacts facts;
    NameMerger merger(pair.renames);
    collect_facts(pair.old_fn, merger, Side::Old, facts);
    collect_facts(pair.new_fn, merger, Side::New, facts);
    return facts;
}

}  // namespace pairguard
