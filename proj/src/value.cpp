#include "pairguard/value.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <unordered_map>
#include <unordered_set>

#include "pairguard/pyfmt.hpp"
#include "pairguard/rng.hpp"

namespace pairguard {

namespace {

constexpr const char* kKindNames[kAbstractKindCount] = {
    "None", "Boolean", "Integer", "Float", "String", "List", "Tuple", "Dictionary", "Set", "Callable", "Resource",
    "Object",
};

constexpr int kSerializeDepth = 16;
constexpr int kCompareDepth = 200;
constexpr std::size_t kMaxSequence = 10'000'000;

using ListP = std::shared_ptr<ListObj>;
using TupleP = std::shared_ptr<TupleObj>;
using DictP = std::shared_ptr<DictObj>;
using SetP = std::shared_ptr<SetObj>;
using FuncP = std::shared_ptr<FunctionObj>;
using GenP = std::shared_ptr<GeneratorObj>;
using VersP = std::shared_ptr<VersatileObj>;
using ExcP = std::shared_ptr<ExceptionObj>;
using BuiltinP = std::shared_ptr<BuiltinObj>;

const void* identity_of(const Value& v) {
    return std::visit(
        [](const auto& x) -> const void* {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, ListP> || std::is_same_v<T, TupleP> || std::is_same_v<T, DictP> ||
                          std::is_same_v<T, SetP> || std::is_same_v<T, FuncP> || std::is_same_v<T, GenP> ||
                          std::is_same_v<T, VersP> || std::is_same_v<T, ExcP> || std::is_same_v<T, BuiltinP>) {
                return x.get();
            } else {
                return nullptr;
            }
        },
        v);
}

bool is_intlike(const Value& v) { return std::holds_alternative<std::int64_t>(v) || std::holds_alternative<bool>(v); }
bool is_number(const Value& v) { return is_intlike(v) || std::holds_alternative<double>(v); }

std::int64_t as_int(const Value& v) {
    if (auto b = std::get_if<bool>(&v)) return *b ? 1 : 0;
    return std::get<std::int64_t>(v);
}

double as_double(const Value& v) {
    if (auto d = std::get_if<double>(&v)) return *d;
    return static_cast<double>(as_int(v));
}

[[noreturn]] void type_error(const std::string& message) { throw PyError("TypeError", message); }

std::string pointer_key(const void* p) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "p%p", p);
    return buf;
}

}  // namespace

const char* to_string(AbstractKind kind) { return kKindNames[static_cast<int>(kind)]; }

std::optional<AbstractKind> parse_abstract_kind(std::string_view name) {
    for (int i = 0; i < kAbstractKindCount; ++i) {
        if (name == kKindNames[i]) return static_cast<AbstractKind>(i);
    }
    return std::nullopt;
}

std::string hash_key(const Value& v) {
    return std::visit(
        [&](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, NoneV>) {
                return "N";
            } else if constexpr (std::is_same_v<T, bool>) {
                return x ? "i1" : "i0";
            } else if constexpr (std::is_same_v<T, std::int64_t>) {
                return "i" + std::to_string(x);
            } else if constexpr (std::is_same_v<T, double>) {
                if (std::isfinite(x) && x == std::floor(x) && std::fabs(x) < 9.2e18) {
                    return "i" + std::to_string(static_cast<std::int64_t>(x));
                }
                return "f" + pyfmt::format_float(x);
            } else if constexpr (std::is_same_v<T, std::string>) {
                return "s" + x;
            } else if constexpr (std::is_same_v<T, TupleP>) {
                std::string out = "t(";
                for (const auto& item : x->items) out += hash_key(item) + ",";
                return out + ")";
            } else if constexpr (std::is_same_v<T, VersP>) {
                return "v" + std::to_string(x->seed);
            } else if constexpr (std::is_same_v<T, ExcClass>) {
                return "c" + x.name;
            } else if constexpr (std::is_same_v<T, ListP> || std::is_same_v<T, DictP> || std::is_same_v<T, SetP>) {
                type_error("unhashable type: '" + type_name(v) + "'");
            } else {
                return pointer_key(x.get());
            }
        },
        v);
}

const Value* DictObj::find(const Value& key) const {
    auto it = index.find(hash_key(key));
    return it == index.end() ? nullptr : &items[it->second].second;
}

Value* DictObj::find(const Value& key) {
    auto it = index.find(hash_key(key));
    return it == index.end() ? nullptr : &items[it->second].second;
}

void DictObj::set(const Value& key, Value value) {
    std::string k = hash_key(key);
    auto it = index.find(k);
    if (it != index.end()) {
        items[it->second].second = std::move(value);
        return;
    }
    index.emplace(std::move(k), items.size());
    items.emplace_back(key, std::move(value));
}

bool DictObj::erase(const Value& key) {
    auto it = index.find(hash_key(key));
    if (it == index.end()) return false;
    std::size_t pos = it->second;
    items.erase(items.begin() + static_cast<std::ptrdiff_t>(pos));
    index.erase(it);
    for (auto& [k, i] : index) {
        if (i > pos) --i;
    }
    return true;
}

void SetObj::add(const Value& v) {
    std::string k = hash_key(v);
    if (index.count(k)) return;
    index.emplace(std::move(k), items.size());
    items.push_back(v);
}

bool SetObj::erase(const Value& v) {
    auto it = index.find(hash_key(v));
    if (it == index.end()) return false;
    std::size_t pos = it->second;
    items.erase(items.begin() + static_cast<std::ptrdiff_t>(pos));
    index.erase(it);
    for (auto& [k, i] : index) {
        if (i > pos) --i;
    }
    return true;
}

Value make_list(std::vector<Value> items, std::string origin) {
    auto l = std::make_shared<ListObj>();
    l->items = std::move(items);
    l->origin = std::move(origin);
    return l;
}

Value make_tuple(std::vector<Value> items, std::string origin) {
    auto t = std::make_shared<TupleObj>();
    t->items = std::move(items);
    t->origin = std::move(origin);
    return t;
}

Value make_dict(std::string origin) {
    auto d = std::make_shared<DictObj>();
    d->origin = std::move(origin);
    return d;
}

Value make_set(std::string origin) {
    auto s = std::make_shared<SetObj>();
    s->origin = std::move(origin);
    return s;
}

Value make_exception(std::string type_name, std::vector<Value> args, bool intentional) {
    auto e = std::make_shared<ExceptionObj>();
    e->type_name = std::move(type_name);
    e->args = std::move(args);
    e->intentional = intentional;
    return e;
}

std::string type_name(const Value& v) {
    return std::visit(
        [](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, NoneV>) return "NoneType";
            else if constexpr (std::is_same_v<T, bool>) return "bool";
            else if constexpr (std::is_same_v<T, std::int64_t>) return "int";
            else if constexpr (std::is_same_v<T, double>) return "float";
            else if constexpr (std::is_same_v<T, std::string>) return "str";
            else if constexpr (std::is_same_v<T, ListP>) return "list";
            else if constexpr (std::is_same_v<T, TupleP>) return "tuple";
            else if constexpr (std::is_same_v<T, DictP>) return "dict";
            else if constexpr (std::is_same_v<T, SetP>) return "set";
            else if constexpr (std::is_same_v<T, FuncP>) return "function";
            else if constexpr (std::is_same_v<T, GenP>) return "generator";
            else if constexpr (std::is_same_v<T, VersP>) return x->assigned_type.empty() ? "VersatileObject" : x->assigned_type;
            else if constexpr (std::is_same_v<T, ExcP>) return x->type_name;
            else if constexpr (std::is_same_v<T, BuiltinP>) return "builtin_function_or_method";
            else return "type";
        },
        v);
}

std::string origin_of(const Value& v) {
    if (auto l = as_obj<ListObj>(v)) return (*l)->origin;
    if (auto t = as_obj<TupleObj>(v)) return (*t)->origin;
    if (auto d = as_obj<DictObj>(v)) return (*d)->origin;
    if (auto s = as_obj<SetObj>(v)) return (*s)->origin;
    if (auto o = as_obj<VersatileObj>(v)) return (*o)->origin;
    return {};
}

bool truthy(const Value& v) {
    return std::visit(
        [](const auto& x) -> bool {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, NoneV>) return false;
            else if constexpr (std::is_same_v<T, bool>) return x;
            else if constexpr (std::is_same_v<T, std::int64_t>) return x != 0;
            else if constexpr (std::is_same_v<T, double>) return x != 0.0;
            else if constexpr (std::is_same_v<T, std::string>) return !x.empty();
            else if constexpr (std::is_same_v<T, ListP> || std::is_same_v<T, TupleP> || std::is_same_v<T, DictP> ||
                               std::is_same_v<T, SetP>)
                return !x->items.empty();
            else return true;
        },
        v);
}

namespace {

bool equal_impl(const Value& a, const Value& b, int depth) {
    if (depth > kCompareDepth) throw PyError("RecursionError", "maximum recursion depth exceeded in comparison");
    if (is_number(a) && is_number(b)) {
        if (is_intlike(a) && is_intlike(b)) return as_int(a) == as_int(b);
        return as_double(a) == as_double(b);
    }
    if (a.index() != b.index()) return false;
    if (auto s = std::get_if<std::string>(&a)) return *s == std::get<std::string>(b);
    if (is_none(a)) return true;
    if (auto l = as_obj<ListObj>(a)) {
        const auto& x = (*l)->items;
        const auto& y = (*as_obj<ListObj>(b))->items;
        if (x.size() != y.size()) return false;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (!equal_impl(x[i], y[i], depth + 1)) return false;
        }
        return true;
    }
    if (auto t = as_obj<TupleObj>(a)) {
        const auto& x = (*t)->items;
        const auto& y = (*as_obj<TupleObj>(b))->items;
        if (x.size() != y.size()) return false;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (!equal_impl(x[i], y[i], depth + 1)) return false;
        }
        return true;
    }
    if (auto d = as_obj<DictObj>(a)) {
        const auto& x = **d;
        const auto& y = **as_obj<DictObj>(b);
        if (x.items.size() != y.items.size()) return false;
        for (const auto& [k, v] : x.items) {
            const Value* other = y.find(k);
            if (!other || !equal_impl(v, *other, depth + 1)) return false;
        }
        return true;
    }
    if (auto s = as_obj<SetObj>(a)) {
        const auto& x = **s;
        const auto& y = **as_obj<SetObj>(b);
        if (x.items.size() != y.items.size()) return false;
        for (const auto& item : x.items) {
            if (!y.contains(item)) return false;
        }
        return true;
    }
    if (auto o = as_obj<VersatileObj>(a)) return (*o)->seed == (*as_obj<VersatileObj>(b))->seed;
    if (auto c = std::get_if<ExcClass>(&a)) return c->name == std::get<ExcClass>(b).name;
    return identity_of(a) == identity_of(b);
}

}  // namespace

bool values_equal(const Value& a, const Value& b) { return equal_impl(a, b, 0); }

bool values_identical(const Value& a, const Value& b) {
    if (a.index() != b.index()) return false;
    if (const void* p = identity_of(a)) return p == identity_of(b);
    return values_equal(a, b);
}

// ---- serialization ----------------------------------------------------------

namespace {

class Serializer {
public:
    std::string run(const Value& v, int depth) {
        if (depth > kSerializeDepth) return "<depth>";
        return std::visit([&](const auto& x) { return render(x, v, depth); }, v);
    }

private:
    struct StackGuard {
        std::vector<const void*>& stack;
        StackGuard(std::vector<const void*>& s, const void* p) : stack(s) { stack.push_back(p); }
        ~StackGuard() { stack.pop_back(); }
    };

    bool on_stack(const void* p) const { return std::find(stack_.begin(), stack_.end(), p) != stack_.end(); }

    std::string seq(const std::vector<Value>& items, int depth) {
        std::string out;
        for (std::size_t i = 0; i < items.size(); ++i) {
            if (i) out += ", ";
            out += run(items[i], depth + 1);
        }
        return out;
    }

    std::string render(const NoneV&, const Value&, int) { return "None"; }
    std::string render(bool b, const Value&, int) { return b ? "True" : "False"; }
    std::string render(std::int64_t i, const Value&, int) { return std::to_string(i); }
    std::string render(double d, const Value&, int) { return pyfmt::format_float(d); }
    std::string render(const std::string& s, const Value&, int) { return pyfmt::repr_string(s); }
    std::string render(const ListP& l, const Value&, int depth) {
        if (on_stack(l.get())) return "<cycle>";
        StackGuard g(stack_, l.get());
        return "[" + seq(l->items, depth) + "]";
    }
    std::string render(const TupleP& t, const Value&, int depth) {
        if (on_stack(t.get())) return "<cycle>";
        StackGuard g(stack_, t.get());
        if (t->items.size() == 1) return "(" + run(t->items[0], depth + 1) + ",)";
        return "(" + seq(t->items, depth) + ")";
    }
    std::string render(const DictP& d, const Value&, int depth) {
        if (on_stack(d.get())) return "<cycle>";
        StackGuard g(stack_, d.get());
        std::vector<std::pair<std::string, std::string>> entries;
        entries.reserve(d->items.size());
        for (const auto& [k, v] : d->items) entries.emplace_back(run(k, depth + 1), run(v, depth + 1));
        std::sort(entries.begin(), entries.end());
        std::string out = "{";
        for (std::size_t i = 0; i < entries.size(); ++i) {
            if (i) out += ", ";
            out += entries[i].first + ": " + entries[i].second;
        }
        return out + "}";
    }
    std::string render(const SetP& s, const Value&, int depth) {
        if (s->items.empty()) return "set()";
        std::vector<std::string> parts;
        parts.reserve(s->items.size());
        for (const auto& item : s->items) parts.push_back(run(item, depth + 1));
        std::sort(parts.begin(), parts.end());
        std::string out = "{";
        for (std::size_t i = 0; i < parts.size(); ++i) {
            if (i) out += ", ";
            out += parts[i];
        }
        return out + "}";
    }
    std::string render(const FuncP& f, const Value&, int) { return "<function " + f->name + ">"; }
    std::string render(const GenP& g, const Value&, int) { return "<generator " + g->name + ">"; }
    std::string render(const VersP& o, const Value&, int depth) {
        if (on_stack(o.get())) return "<cycle>";
        StackGuard g(stack_, o.get());
        std::string out = "VersatileObject(" + std::to_string(o->seed) + ", ";
        out += o->assigned_type.empty() ? "None" : o->assigned_type;
        out += ", attrs={";
        bool first = true;
        for (const auto& [name, value] : o->attrs) {
            if (!first) out += ", ";
            first = false;
            out += pyfmt::repr_string(name) + ": " + run(value, depth + 1);
        }
        return out + "})";
    }
    std::string render(const ExcP& e, const Value&, int depth) {
        if (on_stack(e.get())) return "<cycle>";
        StackGuard g(stack_, e.get());
        return e->type_name + "(" + seq(e->args, depth) + ")";
    }
    std::string render(const BuiltinP& b, const Value&, int) {
        return b->self ? "<built-in method " + b->name + ">" : "<built-in function " + b->name + ">";
    }
    std::string render(const ExcClass& c, const Value&, int) { return "<class '" + c.name + "'>"; }

    std::vector<const void*> stack_;
};

}  // namespace

std::string serialize(const Value& v) {
    Serializer s;
    return s.run(v, 0);
}

std::string to_display(const Value& v) {
    if (auto s = std::get_if<std::string>(&v)) return *s;
    if (auto e = as_obj<ExceptionObj>(v)) {
        const auto& args = (*e)->args;
        if (args.empty()) return "";
        if (args.size() == 1) return to_display(args[0]);
        Serializer s;
        return s.run(make_tuple(args), 0);
    }
    return serialize(v);
}

// ---- deep copy ----------------------------------------------------------------

namespace {

class Copier {
public:
    Value run(const Value& v) {
        return std::visit(
            [&](const auto& x) -> Value {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, ListP>) {
                    if (auto hit = memo_.find(x.get()); hit != memo_.end()) return hit->second;
                    auto copy = std::make_shared<ListObj>();
                    copy->origin = x->origin;
                    memo_.emplace(x.get(), copy);
                    copy->items.reserve(x->items.size());
                    for (const auto& item : x->items) copy->items.push_back(run(item));
                    return copy;
                } else if constexpr (std::is_same_v<T, TupleP>) {
                    if (auto hit = memo_.find(x.get()); hit != memo_.end()) return hit->second;
                    auto copy = std::make_shared<TupleObj>();
                    copy->origin = x->origin;
                    memo_.emplace(x.get(), copy);
                    copy->items.reserve(x->items.size());
                    for (const auto& item : x->items) copy->items.push_back(run(item));
                    return copy;
                } else if constexpr (std::is_same_v<T, DictP>) {
                    if (auto hit = memo_.find(x.get()); hit != memo_.end()) return hit->second;
                    auto copy = std::make_shared<DictObj>();
                    copy->origin = x->origin;
                    memo_.emplace(x.get(), copy);
                    copy->index = x->index;
                    copy->items.reserve(x->items.size());
                    for (const auto& [k, val] : x->items) copy->items.emplace_back(run(k), run(val));
                    return copy;
                } else if constexpr (std::is_same_v<T, SetP>) {
                    if (auto hit = memo_.find(x.get()); hit != memo_.end()) return hit->second;
                    auto copy = std::make_shared<SetObj>();
                    copy->origin = x->origin;
                    memo_.emplace(x.get(), copy);
                    copy->index = x->index;
                    copy->items.reserve(x->items.size());
                    for (const auto& item : x->items) copy->items.push_back(run(item));
                    return copy;
                } else if constexpr (std::is_same_v<T, VersP>) {
                    if (auto hit = memo_.find(x.get()); hit != memo_.end()) return hit->second;
                    auto copy = std::make_shared<VersatileObj>();
                    copy->seed = x->seed;
                    copy->assigned_type = x->assigned_type;
                    copy->flavor = x->flavor;
                    copy->origin = x->origin;
                    memo_.emplace(x.get(), copy);
                    for (const auto& [name, val] : x->attrs) copy->attrs.emplace(name, run(val));
                    return copy;
                } else if constexpr (std::is_same_v<T, ExcP>) {
                    if (auto hit = memo_.find(x.get()); hit != memo_.end()) return hit->second;
                    auto copy = std::make_shared<ExceptionObj>();
                    copy->type_name = x->type_name;
                    copy->intentional = x->intentional;
                    memo_.emplace(x.get(), copy);
                    for (const auto& a : x->args) copy->args.push_back(run(a));
                    return copy;
                } else if constexpr (std::is_same_v<T, BuiltinP>) {
                    if (!x->self) return x;
                    auto copy = std::make_shared<BuiltinObj>();
                    copy->name = x->name;
                    copy->self = run(*x->self);
                    return copy;
                } else {
                    // Immutable scalars; functions and generators are shared.
                    return x;
                }
            },
            v);
    }

private:
    std::unordered_map<const void*, Value> memo_;
};

}  // namespace

Value deep_copy(const Value& v) {
    Copier c;
    return c.run(v);
}

// ---- versatile behaviour --------------------------------------------------------

std::size_t versatile_child_count(const VersatileObj& o) {
    return static_cast<std::size_t>(hash_combine(o.seed, 0x7a11) % 3);
}

Value versatile_child(const VersatileObj& o, std::size_t index) {
    auto child = std::make_shared<VersatileObj>();
    child->seed = hash_combine(o.seed, index + 1);
    child->origin = o.origin + "[" + std::to_string(index) + "]";
    return child;
}

namespace {

Value internal_for(const Value& other) {
    if (std::holds_alternative<double>(other)) return kVersatileFloat;
    if (std::holds_alternative<std::string>(other)) return std::string(kVersatileStr);
    if (as_obj<ListObj>(other)) return make_list();
    if (as_obj<TupleObj>(other)) return make_tuple();
    return kVersatileInt;
}

}  // namespace

Value versatile_binop(ast::BinaryOp op, const Value& lhs, const Value& rhs) {
    bool lv = is_versatile(lhs);
    bool rv = is_versatile(rhs);
    const Value& vers = lv ? lhs : rhs;
    if (lv && rv) {
        try {
            return binary_op(op, Value{kVersatileInt}, Value{kVersatileInt});
        } catch (const PyError&) {
            return vers;
        }
    }
    const Value& other = lv ? rhs : lhs;
    Value internal = internal_for(other);
    for (int attempt = 0; attempt < 2; ++attempt) {
        try {
            return lv ? binary_op(op, internal, other) : binary_op(op, other, internal);
        } catch (const PyError&) {
        }
        if (std::holds_alternative<std::int64_t>(internal)) break;
        internal = kVersatileInt;
    }
    return vers;
}

// ---- arithmetic -------------------------------------------------------------------

namespace {

std::string op_text(ast::BinaryOp op) { return ast::to_string(op); }

[[noreturn]] void unsupported(ast::BinaryOp op, const Value& a, const Value& b) {
    type_error("unsupported operand type(s) for " + op_text(op) + ": '" + type_name(a) + "' and '" + type_name(b) +
               "'");
}

[[noreturn]] void overflow() { throw PyError("OverflowError", "integer result out of 64-bit range"); }

Value int_arith(ast::BinaryOp op, std::int64_t a, std::int64_t b) {
    std::int64_t r = 0;
    switch (op) {
        case ast::BinaryOp::Add:
            if (__builtin_add_overflow(a, b, &r)) overflow();
            return r;
        case ast::BinaryOp::Sub:
            if (__builtin_sub_overflow(a, b, &r)) overflow();
            return r;
        case ast::BinaryOp::Mul:
            if (__builtin_mul_overflow(a, b, &r)) overflow();
            return r;
        case ast::BinaryOp::Div:
            if (b == 0) throw PyError("ZeroDivisionError", "division by zero");
            return static_cast<double>(a) / static_cast<double>(b);
        case ast::BinaryOp::FloorDiv: {
            if (b == 0) throw PyError("ZeroDivisionError", "integer division or modulo by zero");
            if (a == std::numeric_limits<std::int64_t>::min() && b == -1) overflow();
            std::int64_t q = a / b;
            if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
            return q;
        }
        case ast::BinaryOp::Mod: {
            if (b == 0) throw PyError("ZeroDivisionError", "integer division or modulo by zero");
            if (b == -1) return std::int64_t{0};
            std::int64_t m = a % b;
            if (m != 0 && ((m < 0) != (b < 0))) m += b;
            return m;
        }
        case ast::BinaryOp::Pow: {
            if (b < 0) {
                if (a == 0) throw PyError("ZeroDivisionError", "0.0 cannot be raised to a negative power");
                return std::pow(static_cast<double>(a), static_cast<double>(b));
            }
            std::int64_t result = 1;
            std::int64_t base = a;
            std::int64_t e = b;
            while (e > 0) {
                if (e & 1) {
                    if (__builtin_mul_overflow(result, base, &result)) overflow();
                }
                e >>= 1;
                if (e > 0 && __builtin_mul_overflow(base, base, &base)) overflow();
            }
            return result;
        }
    }
    return NoneV{};
}

Value float_arith(ast::BinaryOp op, double a, double b) {
    switch (op) {
        case ast::BinaryOp::Add: return a + b;
        case ast::BinaryOp::Sub: return a - b;
        case ast::BinaryOp::Mul: return a * b;
        case ast::BinaryOp::Div:
            if (b == 0.0) throw PyError("ZeroDivisionError", "float division by zero");
            return a / b;
        case ast::BinaryOp::FloorDiv:
            if (b == 0.0) throw PyError("ZeroDivisionError", "float floor division by zero");
            return std::floor(a / b);
        case ast::BinaryOp::Mod: {
            if (b == 0.0) throw PyError("ZeroDivisionError", "float modulo");
            double m = std::fmod(a, b);
            if (m != 0.0 && ((m < 0) != (b < 0))) m += b;
            return m;
        }
        case ast::BinaryOp::Pow: {
            if (a == 0.0 && b < 0) throw PyError("ZeroDivisionError", "0.0 cannot be raised to a negative power");
            if (a < 0 && b != std::floor(b)) throw PyError("ValueError", "complex result not supported");
            double r = std::pow(a, b);
            if (std::isinf(r) && std::isfinite(a) && std::isfinite(b)) throw PyError("OverflowError", "result too large");
            return r;
        }
    }
    return NoneV{};
}

std::vector<Value> repeat(const std::vector<Value>& items, std::int64_t n) {
    std::vector<Value> out;
    if (n <= 0) return out;
    if (items.size() * static_cast<std::size_t>(n) > kMaxSequence) throw PyError("MemoryError", "sequence too large");
    out.reserve(items.size() * static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) out.insert(out.end(), items.begin(), items.end());
    return out;
}

std::string repeat_str(const std::string& s, std::int64_t n) {
    if (n <= 0) return {};
    if (s.size() * static_cast<std::size_t>(n) > kMaxSequence) throw PyError("MemoryError", "string too large");
    std::string out;
    out.reserve(s.size() * static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) out += s;
    return out;
}

}  // namespace

Value binary_op(ast::BinaryOp op, const Value& a, const Value& b) {
    if (is_versatile(a) || is_versatile(b)) return versatile_binop(op, a, b);
    if (is_number(a) && is_number(b)) {
        if (is_intlike(a) && is_intlike(b)) return int_arith(op, as_int(a), as_int(b));
        return float_arith(op, as_double(a), as_double(b));
    }
    using ast::BinaryOp;
    if (auto s = std::get_if<std::string>(&a)) {
        if (op == BinaryOp::Add) {
            if (auto t = std::get_if<std::string>(&b)) {
                if (s->size() + t->size() > kMaxSequence) throw PyError("MemoryError", "string too large");
                return *s + *t;
            }
            type_error("can only concatenate str (not \"" + type_name(b) + "\") to str");
        }
        if (op == BinaryOp::Mul && is_intlike(b)) return repeat_str(*s, as_int(b));
        if (op == BinaryOp::Mod) return percent_format(*s, b);
        unsupported(op, a, b);
    }
    if (op == BinaryOp::Mul && is_intlike(a)) {
        if (auto t = std::get_if<std::string>(&b)) return repeat_str(*t, as_int(a));
        if (auto l = as_obj<ListObj>(b)) return make_list(repeat((*l)->items, as_int(a)));
        if (auto t = as_obj<TupleObj>(b)) return make_tuple(repeat((*t)->items, as_int(a)));
    }
    if (auto l = as_obj<ListObj>(a)) {
        if (op == BinaryOp::Add) {
            if (auto r = as_obj<ListObj>(b)) {
                std::vector<Value> items = (*l)->items;
                items.insert(items.end(), (*r)->items.begin(), (*r)->items.end());
                if (items.size() > kMaxSequence) throw PyError("MemoryError", "list too large");
                return make_list(std::move(items));
            }
            type_error("can only concatenate list (not \"" + type_name(b) + "\") to list");
        }
        if (op == BinaryOp::Mul && is_intlike(b)) return make_list(repeat((*l)->items, as_int(b)));
    }
    if (auto t = as_obj<TupleObj>(a)) {
        if (op == BinaryOp::Add) {
            if (auto r = as_obj<TupleObj>(b)) {
                std::vector<Value> items = (*t)->items;
                items.insert(items.end(), (*r)->items.begin(), (*r)->items.end());
                if (items.size() > kMaxSequence) throw PyError("MemoryError", "tuple too large");
                return make_tuple(std::move(items));
            }
            type_error("can only concatenate tuple (not \"" + type_name(b) + "\") to tuple");
        }
        if (op == BinaryOp::Mul && is_intlike(b)) return make_tuple(repeat((*t)->items, as_int(b)));
    }
    if (auto s = as_obj<SetObj>(a); s && op == BinaryOp::Sub) {
        if (auto r = as_obj<SetObj>(b)) {
            auto out = std::make_shared<SetObj>();
            for (const auto& item : (*s)->items) {
                if (!(*r)->contains(item)) out->add(item);
            }
            return out;
        }
    }
    unsupported(op, a, b);
}

Value unary_op(ast::UnaryOp op, const Value& v) {
    if (op == ast::UnaryOp::Not) return !truthy(v);
    if (is_versatile(v)) return op == ast::UnaryOp::Neg ? -kVersatileInt : kVersatileInt;
    if (is_intlike(v)) {
        std::int64_t i = as_int(v);
        if (op == ast::UnaryOp::Pos) return i;
        if (i == std::numeric_limits<std::int64_t>::min()) overflow();
        return -i;
    }
    if (auto d = std::get_if<double>(&v)) return op == ast::UnaryOp::Neg ? -*d : *d;
    type_error(std::string("bad operand type for unary ") + ast::to_string(op) + ": '" + type_name(v) + "'");
}

// ---- comparisons ----------------------------------------------------------------

namespace {

// Three-way ordering; nullopt when the operands are not orderable.
std::optional<int> order(const Value& a, const Value& b, int depth);

std::optional<int> order_seq(const std::vector<Value>& x, const std::vector<Value>& y, int depth) {
    std::size_t n = std::min(x.size(), y.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (equal_impl(x[i], y[i], depth + 1)) continue;
        return order(x[i], y[i], depth + 1);
    }
    if (x.size() == y.size()) return 0;
    return x.size() < y.size() ? -1 : 1;
}

std::optional<int> order(const Value& a, const Value& b, int depth) {
    if (depth > kCompareDepth) throw PyError("RecursionError", "maximum recursion depth exceeded in comparison");
    if (is_number(a) && is_number(b)) {
        if (is_intlike(a) && is_intlike(b)) {
            auto x = as_int(a), y = as_int(b);
            return x < y ? -1 : (x > y ? 1 : 0);
        }
        double x = as_double(a), y = as_double(b);
        if (std::isnan(x) || std::isnan(y)) return 2;  // every ordering is false
        return x < y ? -1 : (x > y ? 1 : 0);
    }
    if (auto s = std::get_if<std::string>(&a)) {
        if (auto t = std::get_if<std::string>(&b)) {
            int c = s->compare(*t);
            return c < 0 ? -1 : (c > 0 ? 1 : 0);
        }
        return std::nullopt;
    }
    if (auto l = as_obj<ListObj>(a)) {
        if (auto r = as_obj<ListObj>(b)) return order_seq((*l)->items, (*r)->items, depth);
        return std::nullopt;
    }
    if (auto t = as_obj<TupleObj>(a)) {
        if (auto r = as_obj<TupleObj>(b)) return order_seq((*t)->items, (*r)->items, depth);
        return std::nullopt;
    }
    return std::nullopt;
}

bool apply_order(ast::CompareOp op, int c) {
    if (c == 2) return false;
    switch (op) {
        case ast::CompareOp::Lt: return c < 0;
        case ast::CompareOp::LtE: return c <= 0;
        case ast::CompareOp::Gt: return c > 0;
        case ast::CompareOp::GtE: return c >= 0;
        default: return false;
    }
}

bool versatile_order(ast::CompareOp op, const Value& a, const Value& b) {
    auto va = as_obj<VersatileObj>(a);
    auto vb = as_obj<VersatileObj>(b);
    if (va && vb) {
        auto x = (*va)->seed, y = (*vb)->seed;
        return apply_order(op, x < y ? -1 : (x > y ? 1 : 0));
    }
    const Value& other = va ? b : a;
    Value internal;
    if (std::holds_alternative<std::string>(other)) internal = std::string(kVersatileStr);
    else if (std::holds_alternative<double>(other)) internal = kVersatileFloat;
    else if (is_intlike(other)) internal = kVersatileInt;
    else return false;
    auto c = va ? order(internal, other, 0) : order(other, internal, 0);
    return c && apply_order(op, *c);
}

}  // namespace

bool contains(const Value& container, const Value& item) {
    if (auto s = std::get_if<std::string>(&container)) {
        if (auto t = std::get_if<std::string>(&item)) return s->find(*t) != std::string::npos;
        if (is_versatile(item)) return s->find(kVersatileStr) != std::string::npos;
        type_error("'in <string>' requires string as left operand, not " + type_name(item));
    }
    auto any_equal = [&](const std::vector<Value>& items) {
        for (const auto& x : items) {
            if (values_equal(x, item)) return true;
        }
        return false;
    };
    if (auto l = as_obj<ListObj>(container)) return any_equal((*l)->items);
    if (auto t = as_obj<TupleObj>(container)) return any_equal((*t)->items);
    if (auto d = as_obj<DictObj>(container)) return (*d)->find(item) != nullptr;
    if (auto s = as_obj<SetObj>(container)) return (*s)->contains(item);
    if (auto o = as_obj<VersatileObj>(container)) {
        for (std::size_t i = 0, n = versatile_child_count(**o); i < n; ++i) {
            if (values_equal(versatile_child(**o, i), item)) return true;
        }
        return false;
    }
    if (auto g = as_obj<GeneratorObj>(container)) {
        while (auto next = (*g)->next()) {
            if (values_equal(*next, item)) return true;
        }
        return false;
    }
    type_error("argument of type '" + type_name(container) + "' is not iterable");
}

bool compare_op(ast::CompareOp op, const Value& a, const Value& b) {
    using ast::CompareOp;
    switch (op) {
        case CompareOp::Eq: return values_equal(a, b);
        case CompareOp::NotEq: return !values_equal(a, b);
        case CompareOp::In: return contains(b, a);
        case CompareOp::NotIn: return !contains(b, a);
        case CompareOp::Is: return values_identical(a, b);
        case CompareOp::IsNot: return !values_identical(a, b);
        default: break;
    }
    if (is_versatile(a) || is_versatile(b)) return versatile_order(op, a, b);
    auto c = order(a, b, 0);
    if (!c) {
        type_error(std::string("'") + ast::to_string(op) + "' not supported between instances of '" + type_name(a) +
                   "' and '" + type_name(b) + "'");
    }
    return apply_order(op, *c);
}

std::int64_t length(const Value& v) {
    if (auto s = std::get_if<std::string>(&v)) {
        std::int64_t n = 0;
        for (unsigned char c : *s) {
            if ((c & 0xC0) != 0x80) ++n;
        }
        return n;
    }
    if (auto l = as_obj<ListObj>(v)) return static_cast<std::int64_t>((*l)->items.size());
    if (auto t = as_obj<TupleObj>(v)) return static_cast<std::int64_t>((*t)->items.size());
    if (auto d = as_obj<DictObj>(v)) return static_cast<std::int64_t>((*d)->items.size());
    if (auto s = as_obj<SetObj>(v)) return static_cast<std::int64_t>((*s)->items.size());
    if (is_versatile(v)) return 1;
    type_error("object of type '" + type_name(v) + "' has no len()");
}

std::string percent_format(const std::string& fmt, const Value& args) {
    std::vector<Value> items;
    if (auto t = as_obj<TupleObj>(args)) items = (*t)->items;
    else items.push_back(args);
    std::size_t next = 0;
    auto take = [&]() -> const Value& {
        if (next >= items.size()) type_error("not enough arguments for format string");
        return items[next++];
    };
    std::string out;
    for (std::size_t i = 0; i < fmt.size(); ++i) {
        char c = fmt[i];
        if (c != '%') {
            out += c;
            continue;
        }
        std::size_t j = i + 1;
        std::string spec = "%";
        while (j < fmt.size() && std::string_view("-+ 0#").find(fmt[j]) != std::string_view::npos) spec += fmt[j++];
        while (j < fmt.size() && std::isdigit(static_cast<unsigned char>(fmt[j]))) spec += fmt[j++];
        if (j < fmt.size() && fmt[j] == '.') {
            spec += fmt[j++];
            while (j < fmt.size() && std::isdigit(static_cast<unsigned char>(fmt[j]))) spec += fmt[j++];
        }
        if (j >= fmt.size()) throw PyError("ValueError", "incomplete format");
        char conv = fmt[j];
        i = j;
        char buf[128];
        switch (conv) {
            case '%': out += '%'; break;
            case 's': out += to_display(take()); break;
            case 'r': out += serialize(take()); break;
            case 'd':
            case 'i': {
                const Value& v = take();
                std::int64_t n;
                if (is_versatile(v)) n = kVersatileInt;
                else if (is_intlike(v)) n = as_int(v);
                else if (auto d = std::get_if<double>(&v)) n = static_cast<std::int64_t>(*d);
                else type_error("%d format: a real number is required, not " + type_name(v));
                std::snprintf(buf, sizeof(buf), (spec + "lld").c_str(), static_cast<long long>(n));
                out += buf;
                break;
            }
            case 'x': {
                const Value& v = take();
                if (!is_intlike(v)) type_error("%x format: an integer is required, not " + type_name(v));
                std::snprintf(buf, sizeof(buf), (spec + "llx").c_str(), static_cast<long long>(as_int(v)));
                out += buf;
                break;
            }
            case 'f':
            case 'e':
            case 'g': {
                const Value& v = take();
                double d;
                if (is_versatile(v)) d = kVersatileFloat;
                else if (is_number(v)) d = as_double(v);
                else type_error("must be real number, not " + type_name(v));
                std::snprintf(buf, sizeof(buf), (spec + conv).c_str(), d);
                out += buf;
                break;
            }
            default: throw PyError("ValueError", std::string("unsupported format character '") + conv + "'");
        }
    }
    if (next < items.size()) {
        type_error("not all arguments converted during string formatting");
    }
    return out;
}

}  // namespace pairguard
