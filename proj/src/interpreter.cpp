#include "interpreter.hpp"

#include <algorithm>
#include <unordered_set>

#include "pairguard/comparator.hpp"

namespace pairguard::detail {

namespace {

constexpr std::size_t kGeneratorStack = 1 << 20;
constexpr int kGeneratorDepth = 48;  // extra call levels allowed inside one generator body

const std::unordered_set<std::string>& builtin_names() {
    static const std::unordered_set<std::string> names = {
        "print", "len",   "isinstance", "super", "any",       "all",    "range",  "str",
        "int",   "float", "bool",       "repr",  "list",      "dict",   "set",    "tuple",
        "enumerate", "sorted", "min",   "max",   "abs"};
    return names;
}

bool is_dotted_name(const ast::Expr& e) {
    if (e.as<ast::Name>()) return true;
    if (auto a = e.as<ast::Attribute>()) return is_dotted_name(*a->value);
    return false;
}

std::string dotted_text(const ast::Expr& e) {
    if (auto n = e.as<ast::Name>()) return n->id;
    auto a = e.as<ast::Attribute>();
    return dotted_text(*a->value) + "." + a->attr;
}

[[noreturn]] void raise_py(const std::string& type, const std::string& msg) { throw PyError(type, msg); }

std::int64_t index_arg(const Value& v) {
    if (auto i = std::get_if<std::int64_t>(&v)) return *i;
    if (auto b = std::get_if<bool>(&v)) return *b ? 1 : 0;
    if (is_versatile(v)) return kVersatileInt;
    raise_py("TypeError", "indices must be integers, not " + type_name(v));
}

std::vector<std::string> utf8_chars(const std::string& s) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < s.size();) {
        std::size_t j = i + 1;
        while (j < s.size() && (static_cast<unsigned char>(s[j]) & 0xC0) == 0x80) ++j;
        out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

bool is_ascii(const std::string& s) {
    return std::all_of(s.begin(), s.end(), [](char c) { return static_cast<unsigned char>(c) < 0x80; });
}

Value index_sequence(const std::vector<Value>& items, const Value& idx) {
    std::int64_t i = index_arg(idx);
    auto n = static_cast<std::int64_t>(items.size());
    if (i < 0) i += n;
    if (i < 0 || i >= n) raise_py("IndexError", "index out of range");
    return items[static_cast<std::size_t>(i)];
}

Value index_value(const Value& base, const Value& idx) {
    if (auto l = as_obj<ListObj>(base)) return index_sequence((*l)->items, idx);
    if (auto t = as_obj<TupleObj>(base)) return index_sequence((*t)->items, idx);
    if (auto d = as_obj<DictObj>(base)) {
        if (const Value* v = (*d)->find(idx)) return *v;
        raise_py("KeyError", serialize(idx));
    }
    if (auto s = std::get_if<std::string>(&base)) {
        std::int64_t i = index_arg(idx);
        if (is_ascii(*s)) {
            auto n = static_cast<std::int64_t>(s->size());
            if (i < 0) i += n;
            if (i < 0 || i >= n) raise_py("IndexError", "string index out of range");
            return std::string(1, (*s)[static_cast<std::size_t>(i)]);
        }
        auto chars = utf8_chars(*s);
        auto n = static_cast<std::int64_t>(chars.size());
        if (i < 0) i += n;
        if (i < 0 || i >= n) raise_py("IndexError", "string index out of range");
        return chars[static_cast<std::size_t>(i)];
    }
    raise_py("TypeError", "'" + type_name(base) + "' object is not subscriptable");
}

std::pair<std::size_t, std::size_t> slice_bounds(std::size_t size, const Value& lo, const Value& hi) {
    auto n = static_cast<std::int64_t>(size);
    auto clamp = [n](const Value& v, std::int64_t dflt) {
        if (is_none(v)) return dflt;
        std::int64_t i = index_arg(v);
        if (i < 0) i += n;
        return std::clamp<std::int64_t>(i, 0, n);
    };
    std::int64_t a = clamp(lo, 0);
    std::int64_t b = clamp(hi, n);
    if (b < a) b = a;
    return {static_cast<std::size_t>(a), static_cast<std::size_t>(b)};
}

Value slice_value(const Value& base, const Value& lo, const Value& hi) {
    auto cut = [&](const std::vector<Value>& items) {
        auto [a, b] = slice_bounds(items.size(), lo, hi);
        return std::vector<Value>(items.begin() + static_cast<std::ptrdiff_t>(a),
                                  items.begin() + static_cast<std::ptrdiff_t>(b));
    };
    if (auto l = as_obj<ListObj>(base)) return make_list(cut((*l)->items));
    if (auto t = as_obj<TupleObj>(base)) return make_tuple(cut((*t)->items));
    if (auto s = std::get_if<std::string>(&base)) {
        if (is_ascii(*s)) {
            auto [a, b] = slice_bounds(s->size(), lo, hi);
            return s->substr(a, b - a);
        }
        auto chars = utf8_chars(*s);
        auto [a, b] = slice_bounds(chars.size(), lo, hi);
        std::string out;
        for (std::size_t i = a; i < b; ++i) out += chars[i];
        return out;
    }
    raise_py("TypeError", "'" + type_name(base) + "' object is not subscriptable");
}

}  // namespace

// ---------------------------------------------------------------------------
// generators

class GeneratorImpl final : public GeneratorObj {
public:
    GeneratorImpl(Interpreter* interp, std::function<void(Coro::push_type&)> body)
        : interp_(interp), body_(std::move(body)) {}

    std::optional<Value> next() override {
        if (done_) return std::nullopt;
        if (running_) throw PyError("ValueError", "generator already executing");
        struct Guard {
            GeneratorImpl& g;
            int saved_line;
            int pending = std::uncaught_exceptions();
            ~Guard() {
                g.running_ = false;
                g.interp_->current_line_ = saved_line;
                if (std::uncaught_exceptions() > pending) g.done_ = true;
            }
        } guard{*this, interp_->current_line_};
        running_ = true;
        if (!pull_) {
            pull_.emplace(boost::coroutines2::fixedsize_stack(kGeneratorStack), body_);
        } else {
            (*pull_)();
        }
        if (!*pull_) {
            done_ = true;
            return std::nullopt;
        }
        return pull_->get();
    }

    // Unwinds a suspended body while the interpreter is still alive.
    void close() {
        if (running_) return;
        done_ = true;
        pull_.reset();
    }

private:
    Interpreter* interp_;
    std::function<void(Coro::push_type&)> body_;
    std::optional<Coro::pull_type> pull_;
    bool running_ = false;
    bool done_ = false;
};

const Value* Args::keyword(const std::string& name) const {
    for (const auto& [k, v] : keywords) {
        if (k == name) return &v;
    }
    return nullptr;
}

Interpreter::Interpreter(const ComparisonProgram& program, Side side, ConsistencyMap& cmap, const StaticFacts& facts,
                         const RunConfig& cfg, const Predictor& predictor, std::uint64_t seed)
    : program_(program),
      side_(side),
      cmap_(cmap),
      facts_(facts),
      cfg_(cfg),
      predictor_(predictor),
      seed_(seed),
      lines_(side == Side::Old ? program.old_lines : program.new_lines),
      changed_(program.changed(side)) {
    covered_.assign(lines_.size() + 2, 0);
}

Interpreter::~Interpreter() { close_generators(); }

void Interpreter::close_generators() {
    // Closing may drop the last reference to other generators, so take a copy.
    auto gens = std::move(generators_);
    generators_.clear();
    for (auto& w : gens) {
        if (auto g = w.lock()) g->close();
    }
}

void Interpreter::tick() {
    if (++out_.steps > cfg_.step_budget) throw EngineFault("step budget exhausted");
}

void Interpreter::cover(int first, int last) {
    for (int l = std::max(first, 1); l <= last && l < static_cast<int>(covered_.size()); ++l) covered_[l] = 1;
}

const std::string& Interpreter::line_text(int line) const {
    static const std::string empty;
    if (line < 1 || line > static_cast<int>(lines_.size())) return empty;
    return lines_[static_cast<std::size_t>(line - 1)];
}

void Interpreter::check_path(const std::string& path) const {
    if (path.size() > cfg_.max_path_length) throw EngineFault("access path too long");
}

Value Interpreter::inject(const std::string& path, QueryKind kind, const std::string& name,
                          std::optional<AbstractKind> forced) {
    check_path(path);
    if (const ConsistencyEntry* e = cmap_.find(path)) return side_ == Side::Old ? e->v_old : e->v_new;
    Rng rng = Rng::stream(seed_, path);
    AbstractKind k = forced ? *forced : predictor_.predict({kind, name, line_text(current_line_)}).sample(rng);
    const ConsistencyEntry& e = cmap_.insert(path, concretize(k, cfg_.concretizer, rng, path));
    return side_ == Side::Old ? e.v_old : e.v_new;
}

// ---------------------------------------------------------------------------
// entry

ExecutionOutcome Interpreter::run() {
    out_.side = side_;
    const SourceFunction& fn = program_.function(side_);
    const ast::FunctionDef& fd = fn.function();
    cover(fn.def->line, fn.def->end_line);
    current_line_ = fn.def->line;

    Frame f;
    f.scope = std::make_shared<Scope>();
    f.limit = cfg_.max_call_depth;

    auto record = [&](const std::string& type, const std::string& args, bool intentional) {
        out_.return_value.reset();
        out_.probe.reset();
        out_.exception = ExceptionInfo{intentional, type, args};
    };
    try {
        Value result;
        if (fd.is_generator) {
            auto scope = f.scope;
            int limit = std::min(f.limit, kGeneratorDepth);
            result = make_generator(program_.name(side_), [this, &fd, scope, limit](Coro::push_type& sink) {
                Frame g;
                g.scope = scope;
                g.sink = &sink;
                g.limit = limit;
                exec_block(fd.body, g);
            });
        } else {
            Flow flow = exec_block(fd.body, f);
            result = flow == Flow::Return ? f.ret : Value{NoneV{}};
        }
        result = unwrap(result);
        out_.return_value = serialize(result);
        if (auto fobj = as_obj<FunctionObj>(result)) {
            if (auto closure = std::dynamic_pointer_cast<Closure>(*fobj)) {
                Args none;
                out_.probe = serialize(unwrap(call_closure(closure, none, f, true)));
            }
        }
    } catch (const SubjectException& e) {
        const auto& exc = **as_obj<ExceptionObj>(e.exc());
        record(exc.type_name, serialize(make_tuple(exc.args)), exc.intentional);
    } catch (const PyError& e) {
        record(e.type(), serialize(make_tuple({e.message()})), false);
    } catch (const EngineFault& e) {
        record("EngineFault", serialize(make_tuple({std::string(e.what())})), false);
    } catch (const std::bad_alloc&) {
        record("MemoryError", "()", false);
    }
    close_generators();

    for (int l = 1; l < static_cast<int>(covered_.size()); ++l) {
        if (!covered_[l]) continue;
        out_.covered_lines.insert(l);
        if (changed_.count(l)) out_.covered_changed_lines.insert(l);
    }
    for (const auto& path : cmap_.paths()) {
        const ConsistencyEntry* e = cmap_.find(path);
        out_.injected_state[path] = serialize(side_ == Side::Old ? e->v_old : e->v_new);
    }
    return std::move(out_);
}

Value Interpreter::unwrap(const Value& v) { return unwrap_return(v, cfg_.generator_cap); }

Value Interpreter::make_generator(std::string name, std::function<void(Coro::push_type&)> body) {
    auto g = std::make_shared<GeneratorImpl>(this, std::move(body));
    g->name = std::move(name);
    generators_.push_back(g);
    return std::shared_ptr<GeneratorObj>(g);
}

// ---------------------------------------------------------------------------
// statements

Flow Interpreter::exec_block(const ast::Block& block, Frame& f) {
    for (const auto& s : block) {
        Flow flow = exec_stmt(*s, f);
        if (flow != Flow::Normal) return flow;
    }
    return Flow::Normal;
}

Flow Interpreter::exec_stmt(const ast::Stmt& s, Frame& f) {
    tick();
    current_line_ = s.line;
    cover(s.line, s.end_line);

    if (auto x = s.as<ast::ExprStmt>()) {
        eval(*x->value, f);
        return Flow::Normal;
    }
    if (auto x = s.as<ast::Assign>()) {
        Value v = eval(*x->value, f);
        for (const auto& t : x->targets) assign(*t, v, f);
        return Flow::Normal;
    }
    if (auto x = s.as<ast::If>()) {
        if (truthy(eval(*x->test, f))) return exec_block(x->body, f);
        if (x->orelse.empty()) return Flow::Normal;
        if (x->else_line) cover(x->else_line, x->else_line);
        return exec_block(x->orelse, f);
    }
    if (auto x = s.as<ast::Return>()) {
        f.ret = x->value ? eval(*x->value, f) : Value{NoneV{}};
        return Flow::Return;
    }
    if (auto x = s.as<ast::For>()) {
        Value iterable = eval(*x->iter, f);
        Flow result = Flow::Normal;
        for_each(iterable, [&](const Value& item) {
            tick();
            assign(*x->target, item, f);
            Flow flow = exec_block(x->body, f);
            if (flow == Flow::Break) return false;
            if (flow == Flow::Return) {
                result = Flow::Return;
                return false;
            }
            return true;
        });
        return result;
    }
    if (auto x = s.as<ast::While>()) {
        while (truthy(eval(*x->test, f))) {
            tick();
            Flow flow = exec_block(x->body, f);
            if (flow == Flow::Break) break;
            if (flow == Flow::Return) return flow;
        }
        return Flow::Normal;
    }
    if (auto x = s.as<ast::AugAssign>()) {
        aug_assign(*x, f);
        return Flow::Normal;
    }
    if (auto x = s.as<ast::Try>()) return exec_try(*x, f);
    if (auto x = s.as<ast::Raise>()) {
        exec_raise(*x, f);
        return Flow::Normal;
    }
    if (auto x = s.as<ast::Assert>()) {
        if (!truthy(eval(*x->test, f))) {
            std::vector<Value> args;
            if (x->msg) args.push_back(eval(*x->msg, f));
            throw SubjectException(make_exception("AssertionError", std::move(args), true));
        }
        return Flow::Normal;
    }
    if (auto x = s.as<ast::With>()) {
        for (const auto& item : x->items) {
            Value v = eval(*item.context, f);
            if (item.target) assign(*item.target, v, f);
        }
        return exec_block(x->body, f);
    }
    if (auto x = s.as<ast::FunctionDef>()) {
        auto closure = std::make_shared<Closure>();
        closure->name = x->name;
        closure->def = x;
        closure->env = f.scope;
        for (const auto& p : x->params) {
            closure->defaults.push_back(p.default_value ? std::optional<Value>(eval(*p.default_value, f)) : std::nullopt);
        }
        f.scope->vars[x->name] = std::shared_ptr<FunctionObj>(closure);
        return Flow::Normal;
    }
    if (s.as<ast::Break>()) return Flow::Break;
    if (s.as<ast::Continue>()) return Flow::Continue;
    return Flow::Normal;  // pass
}

Flow Interpreter::exec_try(const ast::Try& t, Frame& f) {
    Flow flow = Flow::Normal;
    std::optional<Value> pending;  // exception to propagate after finally

    auto normalize = [](const PyError& e) { return make_exception(e.type(), {e.message()}, false); };

    std::optional<Value> raised;
    try {
        flow = exec_block(t.body, f);
    } catch (const SubjectException& e) {
        raised = e.exc();
    } catch (const PyError& e) {
        raised = normalize(e);
    }

    if (raised) {
        const auto& exc = **as_obj<ExceptionObj>(*raised);
        const ast::ExceptHandler* handler = nullptr;
        for (const auto& h : t.handlers) {
            if (handler_matches(h.types, exc.type_name)) {
                handler = &h;
                break;
            }
        }
        if (!handler) {
            pending = raised;
        } else {
            cover(handler->line, handler->end_line);
            if (!handler->name.empty()) f.scope->vars[handler->name] = *raised;
            f.handling.push_back(*raised);
            try {
                flow = exec_block(handler->body, f);
            } catch (const SubjectException& e) {
                pending = e.exc();
            } catch (const PyError& e) {
                pending = normalize(e);
            }
            f.handling.pop_back();
        }
    } else if (flow == Flow::Normal && !t.orelse.empty()) {
        cover(t.else_line, t.else_line);
        try {
            flow = exec_block(t.orelse, f);
        } catch (const SubjectException& e) {
            pending = e.exc();
        } catch (const PyError& e) {
            pending = normalize(e);
        }
    }

    if (!t.finalbody.empty()) {
        cover(t.finally_line, t.finally_line);
        Flow fin = exec_block(t.finalbody, f);
        if (fin != Flow::Normal) return fin;  // return/break in finally discards the exception
    }
    if (pending) throw SubjectException(*pending);
    return flow;
}

void Interpreter::exec_raise(const ast::Raise& r, Frame& f) {
    if (!r.exc) {
        if (f.handling.empty()) throw PyError("RuntimeError", "No active exception to reraise");
        throw SubjectException(f.handling.back());
    }
    Value v = eval(*r.exc, f);
    if (r.cause) eval(*r.cause, f);
    if (auto c = std::get_if<ExcClass>(&v)) throw SubjectException(make_exception(c->name, {}, true));
    if (auto e = as_obj<ExceptionObj>(v)) {
        (*e)->intentional = true;
        throw SubjectException(v);
    }
    throw PyError("TypeError", "exceptions must derive from BaseException");
}

void Interpreter::assign(const ast::Expr& target, const Value& v, Frame& f) {
    if (auto n = target.as<ast::Name>()) {
        f.scope->vars[n->id] = v;
        return;
    }
    if (auto a = target.as<ast::Attribute>()) {
        store_attr(eval(*a->value, f), a->attr, v);
        return;
    }
    if (auto s = target.as<ast::Subscript>()) {
        Value base = eval(*s->value, f);
        if (s->index->as<ast::Slice>()) throw PyError("TypeError", "slice assignment is not supported");
        store_index(base, eval(*s->index, f), v);
        return;
    }
    const std::vector<ast::ExprPtr>* elts = nullptr;
    if (auto t = target.as<ast::TupleExpr>()) elts = &t->elts;
    if (auto l = target.as<ast::ListExpr>()) elts = &l->elts;
    if (!elts) throw PyError("SyntaxError", "cannot assign to expression");
    std::vector<Value> items;
    if (auto o = as_obj<VersatileObj>(v)) {
        // Versatile objects unpack into exactly as many children as needed.
        for (std::size_t i = 0; i < elts->size(); ++i) items.push_back(versatile_child(**o, i));
    } else {
        items = materialize(v);
    }
    if (items.size() < elts->size()) {
        throw PyError("ValueError", "not enough values to unpack (expected " + std::to_string(elts->size()) +
                                        ", got " + std::to_string(items.size()) + ")");
    }
    if (items.size() > elts->size()) {
        throw PyError("ValueError", "too many values to unpack (expected " + std::to_string(elts->size()) + ")");
    }
    for (std::size_t i = 0; i < elts->size(); ++i) assign(*(*elts)[i], items[i], f);
}

void Interpreter::aug_assign(const ast::AugAssign& a, Frame& f) {
    auto combine = [&](const Value& cur, const Value& rhs) -> Value {
        if (auto l = as_obj<ListObj>(cur); l && a.op == ast::BinaryOp::Add) {
            auto extra = materialize(rhs);
            auto& items = (*l)->items;
            items.insert(items.end(), extra.begin(), extra.end());
            return cur;
        }
        return binary_op(a.op, cur, rhs);
    };
    if (auto n = a.target->as<ast::Name>()) {
        Value cur = eval_name(n->id, f);
        Value rhs = eval(*a.value, f);
        f.scope->vars[n->id] = combine(cur, rhs);
        return;
    }
    if (auto at = a.target->as<ast::Attribute>()) {
        Value base = eval(*at->value, f);
        Value cur = read_attr(base, at->attr, *at->value);
        Value rhs = eval(*a.value, f);
        store_attr(base, at->attr, combine(cur, rhs));
        return;
    }
    if (auto s = a.target->as<ast::Subscript>()) {
        Value base = eval(*s->value, f);
        if (s->index->as<ast::Slice>()) throw PyError("TypeError", "slice assignment is not supported");
        Value idx = eval(*s->index, f);
        Value cur = read_index(base, idx, *s->value);
        Value rhs = eval(*a.value, f);
        store_index(base, idx, combine(cur, rhs));
        return;
    }
    throw PyError("SyntaxError", "illegal expression for augmented assignment");
}

// ---------------------------------------------------------------------------
// names, attributes, subscripts

const Value* Interpreter::lookup(const std::string& id, const Frame& f) const {
    for (const Scope* s = f.scope.get(); s; s = s->parent.get()) {
        auto it = s->vars.find(id);
        if (it != s->vars.end()) return &it->second;
    }
    return nullptr;
}

bool Interpreter::is_exception_name(const std::string& id) const {
    return looks_like_exception_name(id) || program_.handler_names.count(id) > 0;
}

Value Interpreter::eval_name(const std::string& id, Frame& f) {
    if (const Value* v = lookup(id, f)) return *v;
    if (builtin_names().count(id)) return std::make_shared<BuiltinObj>(BuiltinObj{id, std::nullopt});
    if (is_exception_name(id)) return ExcClass{id};
    return inject(program_.merger.merge(id, side_), QueryKind::VariableRead, id);
}

std::string Interpreter::base_path(const ast::Expr& base_expr, const Value& base) {
    std::string origin = origin_of(base);
    if (!origin.empty()) return origin;
    return callee_path(base_expr, program_.merger, side_);
}

Value Interpreter::read_attr(const Value& base, const std::string& attr, const ast::Expr& base_expr) {
    const std::string& mattr = program_.merger.merge(attr, side_);
    if (auto o = as_obj<VersatileObj>(base)) {
        auto it = (*o)->attrs.find(mattr);
        if (it != (*o)->attrs.end()) return it->second;
        std::string prefix = (*o)->origin.empty() ? base_path(base_expr, base) : (*o)->origin;
        return inject(prefix + "." + mattr, QueryKind::AttributeRead, attr);
    }
    if (auto e = as_obj<ExceptionObj>(base); e && attr == "args") return make_tuple((*e)->args);
    if (has_method(base, attr)) return std::make_shared<BuiltinObj>(BuiltinObj{attr, base});
    return inject(base_path(base_expr, base) + "." + mattr, QueryKind::AttributeRead, attr);
}

void Interpreter::store_attr(const Value& base, const std::string& attr, const Value& v) {
    if (auto o = as_obj<VersatileObj>(base)) {
        (*o)->attrs[program_.merger.merge(attr, side_)] = v;
        return;
    }
    throw PyError("AttributeError", "'" + type_name(base) + "' object has no attribute '" + attr + "'");
}

Value Interpreter::read_index(const Value& base, const Value& index, const ast::Expr& base_expr) {
    if (auto o = as_obj<VersatileObj>(base)) {
        std::string key = "[" + serialize(index) + "]";
        auto it = (*o)->attrs.find(key);
        if (it != (*o)->attrs.end()) return it->second;
        std::string prefix = (*o)->origin.empty() ? base_path(base_expr, base) : (*o)->origin;
        return inject(prefix + key, QueryKind::SubscriptResult, serialize(index));
    }
    try {
        return index_value(base, index);
    } catch (const PyError& e) {
        if (e.type() != "IndexError" && e.type() != "KeyError" && e.type() != "TypeError") throw;
    }
    std::string text = serialize(index);
    return inject(base_path(base_expr, base) + "[" + text + "]", QueryKind::SubscriptResult, text);
}

void Interpreter::store_index(const Value& base, const Value& index, const Value& v) {
    if (auto l = as_obj<ListObj>(base)) {
        auto& items = (*l)->items;
        std::int64_t i = index_arg(index);
        auto n = static_cast<std::int64_t>(items.size());
        if (i < 0) i += n;
        if (i < 0 || i >= n) throw PyError("IndexError", "list assignment index out of range");
        items[static_cast<std::size_t>(i)] = v;
        return;
    }
    if (auto d = as_obj<DictObj>(base)) {
        (*d)->set(index, v);
        return;
    }
    if (auto o = as_obj<VersatileObj>(base)) {
        (*o)->attrs["[" + serialize(index) + "]"] = v;
        return;
    }
    throw PyError("TypeError", "'" + type_name(base) + "' object does not support item assignment");
}

// ---------------------------------------------------------------------------
// expressions

Value Interpreter::eval(const ast::Expr& e, Frame& f) {
    if (auto x = e.as<ast::Name>()) return eval_name(x->id, f);
    if (auto x = e.as<ast::Attribute>()) {
        if (looks_like_exception_name(x->attr) && is_dotted_name(*x->value)) return ExcClass{dotted_text(e)};
        Value base = eval(*x->value, f);
        return read_attr(base, x->attr, *x->value);
    }
    if (auto x = e.as<ast::Call>()) return eval_call(*x, f);
    if (auto x = e.as<ast::StrLit>()) return x->value;
    if (auto x = e.as<ast::IntLit>()) return x->value;
    if (auto x = e.as<ast::Compare>()) return eval_compare(*x, f);
    if (auto x = e.as<ast::BoolOpExpr>()) {
        Value v = eval(*x->values[0], f);
        for (std::size_t i = 1; i < x->values.size(); ++i) {
            bool t = truthy(v);
            if (x->op == ast::BoolOp::And ? !t : t) return v;
            v = eval(*x->values[i], f);
        }
        return v;
    }
    if (auto x = e.as<ast::BinOp>()) {
        Value l = eval(*x->left, f);
        Value r = eval(*x->right, f);
        return binary_op(x->op, l, r);
    }
    if (auto x = e.as<ast::UnaryOpExpr>()) return unary_op(x->op, eval(*x->operand, f));
    if (auto x = e.as<ast::Subscript>()) {
        Value base = eval(*x->value, f);
        if (auto sl = x->index->as<ast::Slice>()) {
            Value lo = sl->lower ? eval(*sl->lower, f) : Value{NoneV{}};
            Value hi = sl->upper ? eval(*sl->upper, f) : Value{NoneV{}};
            std::string key = "[" + (is_none(lo) ? std::string() : serialize(lo)) + ":" +
                              (is_none(hi) ? std::string() : serialize(hi)) + "]";
            if (auto o = as_obj<VersatileObj>(base)) {
                return inject(((*o)->origin.empty() ? base_path(*x->value, base) : (*o)->origin) + key,
                              QueryKind::SubscriptResult, key);
            }
            try {
                return slice_value(base, lo, hi);
            } catch (const PyError& err) {
                if (err.type() != "TypeError") throw;
            }
            return inject(base_path(*x->value, base) + key, QueryKind::SubscriptResult, key);
        }
        Value idx = eval(*x->index, f);
        return read_index(base, idx, *x->value);
    }
    if (e.as<ast::NoneLit>()) return NoneV{};
    if (auto x = e.as<ast::BoolLit>()) return x->value;
    if (auto x = e.as<ast::FloatLit>()) return x->value;
    if (auto x = e.as<ast::FString>()) return eval_fstring(*x, f);
    if (auto x = e.as<ast::ListExpr>()) {
        std::vector<Value> items;
        items.reserve(x->elts.size());
        for (const auto& el : x->elts) items.push_back(eval(*el, f));
        return make_list(std::move(items));
    }
    if (auto x = e.as<ast::TupleExpr>()) {
        std::vector<Value> items;
        items.reserve(x->elts.size());
        for (const auto& el : x->elts) items.push_back(eval(*el, f));
        return make_tuple(std::move(items));
    }
    if (auto x = e.as<ast::DictExpr>()) {
        Value d = make_dict();
        auto& obj = **as_obj<DictObj>(d);
        for (std::size_t i = 0; i < x->keys.size(); ++i) {
            Value k = eval(*x->keys[i], f);
            Value v = eval(*x->values[i], f);
            obj.set(k, std::move(v));
        }
        return d;
    }
    if (auto x = e.as<ast::SetExpr>()) {
        Value s = make_set();
        auto& obj = **as_obj<SetObj>(s);
        for (const auto& el : x->elts) obj.add(eval(*el, f));
        return s;
    }
    if (auto x = e.as<ast::IfExp>()) return truthy(eval(*x->test, f)) ? eval(*x->body, f) : eval(*x->orelse, f);
    if (auto x = e.as<ast::ListComp>()) return eval_listcomp(*x, f);
    if (auto x = e.as<ast::GeneratorExp>()) return eval_genexp(*x, f);
    if (auto x = e.as<ast::Lambda>()) {
        auto closure = std::make_shared<Closure>();
        closure->name = "<lambda>";
        closure->lambda = x;
        closure->env = f.scope;
        for (const auto& p : x->params) {
            closure->defaults.push_back(p.default_value ? std::optional<Value>(eval(*p.default_value, f)) : std::nullopt);
        }
        return std::shared_ptr<FunctionObj>(closure);
    }
    if (auto x = e.as<ast::Yield>()) {
        if (!f.sink) throw PyError("SyntaxError", "'yield' outside function");
        Value v = x->value ? eval(*x->value, f) : Value{NoneV{}};
        (*f.sink)(std::move(v));
        return NoneV{};
    }
    throw PyError("SyntaxError", "unsupported expression");
}

Value Interpreter::eval_compare(const ast::Compare& c, Frame& f) {
    Value left = eval(*c.left, f);
    for (std::size_t i = 0; i < c.ops.size(); ++i) {
        Value right = eval(*c.comparators[i], f);
        if (!compare_op(c.ops[i], left, right)) return false;
        left = std::move(right);
    }
    return true;
}

Value Interpreter::eval_fstring(const ast::FString& fs, Frame& f) {
    std::string out;
    for (const auto& part : fs.parts) {
        if (!part.expr) {
            out += part.text;
            continue;
        }
        Value v = eval(*part.expr, f);
        out += part.repr ? serialize(v) : to_display(v);
    }
    return out;
}

void Interpreter::comp_loop(const std::vector<ast::Comprehension>& gens, std::size_t i, Frame& f,
                            const std::function<void(Frame&)>& emit, std::optional<Value> first_iter) {
    if (i == gens.size()) {
        emit(f);
        return;
    }
    const auto& c = gens[i];
    Value iterable = first_iter ? std::move(*first_iter) : eval(*c.iter, f);
    for_each(iterable, [&](const Value& item) {
        tick();
        assign(*c.target, item, f);
        for (const auto& cond : c.ifs) {
            if (!truthy(eval(*cond, f))) return true;
        }
        comp_loop(gens, i + 1, f, emit);
        return true;
    });
}

Value Interpreter::eval_listcomp(const ast::ListComp& lc, Frame& f) {
    Frame cf;
    cf.scope = std::make_shared<Scope>();
    cf.scope->parent = f.scope;
    cf.depth = f.depth;
    cf.limit = f.limit;
    std::vector<Value> items;
    comp_loop(lc.generators, 0, cf, [&](Frame& fr) { items.push_back(eval(*lc.elt, fr)); });
    return make_list(std::move(items));
}

Value Interpreter::eval_genexp(const ast::GeneratorExp& g, Frame& f) {
    // The outermost iterable is evaluated immediately, the rest lazily.
    Value first = eval(*g.generators[0].iter, f);
    auto parent = f.scope;
    int depth = f.depth;
    int limit = std::min(f.limit, f.depth + kGeneratorDepth);
    return make_generator("<genexpr>", [this, &g, parent, first, depth, limit](Coro::push_type& sink) {
        Frame cf;
        cf.scope = std::make_shared<Scope>();
        cf.scope->parent = parent;
        cf.depth = depth;
        cf.limit = limit;
        comp_loop(g.generators, 0, cf, [&](Frame& fr) { sink(eval(*g.elt, fr)); }, first);
    });
}

Args Interpreter::eval_args(const ast::Call& c, Frame& f) {
    Args args;
    args.positional.reserve(c.args.size());
    for (const auto& a : c.args) args.positional.push_back(eval(*a, f));
    for (const auto& k : c.keywords) args.keywords.emplace_back(k.name, eval(*k.value, f));
    return args;
}

// ---------------------------------------------------------------------------
// calls

Value Interpreter::eval_call(const ast::Call& c, Frame& f) {
    const ast::Expr& func = *c.func;
    if (auto n = func.as<ast::Name>()) {
        if (const Value* v = lookup(n->id, f)) {
            Value callee = *v;
            Args args = eval_args(c, f);
            return call_value(callee, args, f, &func);
        }
        if (n->id == "isinstance" && c.args.size() == 2 && c.keywords.empty()) {
            Value v = eval(*c.args[0], f);
            std::vector<std::string> classes;
            std::function<void(const ast::Expr&)> collect = [&](const ast::Expr& e) {
                if (auto t = e.as<ast::TupleExpr>()) {
                    for (const auto& el : t->elts) collect(*el);
                } else if (is_dotted_name(e)) {
                    classes.push_back(dotted_text(e));
                } else {
                    Value cls = eval(e, f);
                    if (auto x = std::get_if<ExcClass>(&cls)) classes.push_back(x->name);
                }
            };
            collect(*c.args[1]);
            return builtin_isinstance(v, classes);
        }
        if (builtin_names().count(n->id)) {
            Args args = eval_args(c, f);
            return call_builtin(n->id, args, f);
        }
        if (is_exception_name(n->id)) {
            Args args = eval_args(c, f);
            return make_exception(n->id, std::move(args.positional), false);
        }
        Args args = eval_args(c, f);
        return external_call(program_.merger.merge(n->id, side_), &func, args, std::nullopt);
    }
    if (auto a = func.as<ast::Attribute>()) {
        if (looks_like_exception_name(a->attr) && is_dotted_name(*a->value)) {
            Args args = eval_args(c, f);
            return make_exception(dotted_text(func), std::move(args.positional), false);
        }
        Value base = eval(*a->value, f);
        const std::string& mattr = program_.merger.merge(a->attr, side_);
        if (auto o = as_obj<VersatileObj>(base)) {
            auto it = (*o)->attrs.find(mattr);
            if (it != (*o)->attrs.end()) {
                Value callee = it->second;
                Args args = eval_args(c, f);
                return call_value(callee, args, f, &func);
            }
            Args args = eval_args(c, f);
            std::string prefix = (*o)->origin.empty() ? base_path(*a->value, base) : (*o)->origin;
            return external_call(prefix + "." + mattr, &func, args, std::nullopt);
        }
        if (has_method(base, a->attr)) {
            Args args = eval_args(c, f);
            return call_method(base, a->attr, args, f);
        }
        Args args = eval_args(c, f);
        return external_call(base_path(*a->value, base) + "." + mattr, &func, args, std::nullopt);
    }
    Value callee = eval(func, f);
    Args args = eval_args(c, f);
    return call_value(callee, args, f, &func);
}

Value Interpreter::call_value(const Value& callee, Args& args, Frame& f, const ast::Expr* func) {
    if (auto fn = as_obj<FunctionObj>(callee)) {
        if (auto closure = std::dynamic_pointer_cast<Closure>(*fn)) return call_closure(closure, args, f, false);
    }
    if (auto b = as_obj<BuiltinObj>(callee)) {
        if ((*b)->self) return call_method(*(*b)->self, (*b)->name, args, f);
        return call_builtin((*b)->name, args, f);
    }
    if (auto c = std::get_if<ExcClass>(&callee)) return make_exception(c->name, std::move(args.positional), false);
    if (auto o = as_obj<VersatileObj>(callee)) {
        std::string path = (*o)->origin.empty() && func ? callee_path(*func, program_.merger, side_) : (*o)->origin;
        std::optional<AbstractKind> forced;
        if ((*o)->flavor == Flavor::Callable) forced = AbstractKind::Object;
        return external_call(path, func, args, forced);
    }
    throw PyError("TypeError", "'" + type_name(callee) + "' object is not callable");
}

Value Interpreter::call_closure(const std::shared_ptr<Closure>& fn, Args& args, Frame& f, bool inject_missing) {
    tick();
    if (f.depth + 1 > f.limit) throw PyError("RecursionError", "maximum recursion depth exceeded");
    const auto& params = fn->params();
    if (args.positional.size() > params.size()) {
        throw PyError("TypeError", fn->name + "() takes " + std::to_string(params.size()) + " positional arguments but " +
                                       std::to_string(args.positional.size()) + " were given");
    }
    auto scope = std::make_shared<Scope>();
    scope->parent = fn->env;
    std::vector<bool> bound(params.size(), false);
    for (std::size_t i = 0; i < args.positional.size(); ++i) {
        scope->vars[params[i].name] = args.positional[i];
        bound[i] = true;
    }
    for (auto& [name, value] : args.keywords) {
        auto it = std::find_if(params.begin(), params.end(), [&](const ast::Param& p) { return p.name == name; });
        if (it == params.end()) throw PyError("TypeError", fn->name + "() got an unexpected keyword argument '" + name + "'");
        auto i = static_cast<std::size_t>(it - params.begin());
        if (bound[i]) throw PyError("TypeError", fn->name + "() got multiple values for argument '" + name + "'");
        scope->vars[name] = value;
        bound[i] = true;
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (bound[i]) continue;
        if (fn->defaults[i]) {
            scope->vars[params[i].name] = *fn->defaults[i];
        } else if (inject_missing) {
            const std::string& name = params[i].name;
            scope->vars[name] = inject("probe." + program_.merger.merge(name, side_), QueryKind::VariableRead, name);
        } else {
            throw PyError("TypeError", fn->name + "() missing required positional argument: '" + params[i].name + "'");
        }
    }

    int saved_line = current_line_;
    Frame child;
    child.scope = scope;
    child.depth = f.depth + 1;
    child.limit = f.limit;
    if (fn->lambda) {
        Value v = eval(*fn->lambda->body, child);
        current_line_ = saved_line;
        return v;
    }
    if (fn->def->is_generator) {
        const ast::FunctionDef* def = fn->def;
        int depth = child.depth;
        int limit = std::min(child.limit, child.depth + kGeneratorDepth);
        return make_generator(fn->name, [this, def, scope, depth, limit](Coro::push_type& sink) {
            Frame g;
            g.scope = scope;
            g.sink = &sink;
            g.depth = depth;
            g.limit = limit;
            exec_block(def->body, g);
        });
    }
    Flow flow = exec_block(fn->def->body, child);
    current_line_ = saved_line;
    return flow == Flow::Return ? child.ret : Value{NoneV{}};
}

Value Interpreter::external_call(const std::string& path, const ast::Expr* func, const Args& args,
                                 std::optional<AbstractKind> forced) {
    check_path(path);
    int occurrence = ++call_counts_[path];
    CallLogEntry entry;
    entry.callee = path;
    entry.occurrence = occurrence;
    for (const auto& a : args.positional) entry.args.push_back(serialize(a));
    for (const auto& [k, v] : args.keywords) entry.kwargs.emplace_back(k, serialize(v));
    std::sort(entry.kwargs.begin(), entry.kwargs.end());
    out_.call_log.push_back(std::move(entry));

    std::string tag = occurrence == 1 ? std::string() : "#" + std::to_string(occurrence);
    if (func && !facts_.call_exception_map.empty()) {
        auto it = facts_.call_exception_map.find(callee_path(*func, program_.merger, side_));
        if (it != facts_.call_exception_map.end() && !it->second.empty()) {
            Rng coin = Rng::stream(seed_, "raise|" + path + "#" + std::to_string(occurrence));
            if (coin.unit() < cfg_.exception_probability) {
                auto type = std::next(it->second.begin(), static_cast<std::ptrdiff_t>(coin.below(it->second.size())));
                throw SubjectException(make_exception(*type, {}, true));
            }
        }
    }
    return inject(path + "()" + tag, QueryKind::CallReturn, path, forced);
}

Value Interpreter::builtin_super() {
    ++super_count_;
    std::string path = super_count_ == 1 ? "super()" : "super()#" + std::to_string(super_count_);
    return inject(path, QueryKind::CallReturn, "super", AbstractKind::Object);
}

}  // namespace pairguard::detail
