#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <unordered_map>
#include <unordered_set>

#include "interpreter.hpp"

namespace pairguard::detail {

namespace {

constexpr std::size_t kMaxItems = 10'000'000;

[[noreturn]] void raise_py(const std::string& type, const std::string& msg) { throw PyError(type, msg); }

const std::string* as_str(const Value& v) { return std::get_if<std::string>(&v); }

const std::string& str_arg(const Value& v, const char* what) {
    if (auto s = as_str(v)) return *s;
    raise_py("TypeError", std::string(what) + " must be str, not " + type_name(v));
}

std::int64_t int_arg(const Value& v) {
    if (auto i = std::get_if<std::int64_t>(&v)) return *i;
    if (auto b = std::get_if<bool>(&v)) return *b ? 1 : 0;
    if (is_versatile(v)) return kVersatileInt;
    raise_py("TypeError", "'" + type_name(v) + "' object cannot be interpreted as an integer");
}

void arity(const Args& args, std::size_t lo, std::size_t hi, const std::string& name) {
    std::size_t n = args.positional.size();
    if (n < lo || n > hi) {
        raise_py("TypeError", name + "() takes " + (lo == hi ? std::to_string(lo) : std::to_string(lo) + " to " +
                                                                                          std::to_string(hi)) +
                                  " arguments (" + std::to_string(n) + " given)");
    }
}

Value arg_or(const Args& args, std::size_t i, const std::string& kw, Value dflt) {
    if (i < args.positional.size()) return args.positional[i];
    if (const Value* v = args.keyword(kw)) return *v;
    return dflt;
}

std::string strip_chars(const std::string& s, const std::string& chars, bool left, bool right) {
    std::size_t a = 0, b = s.size();
    if (left) {
        while (a < b && chars.find(s[a]) != std::string::npos) ++a;
    }
    if (right) {
        while (b > a && chars.find(s[b - 1]) != std::string::npos) --b;
    }
    return s.substr(a, b - a);
}

const std::string kWhitespace = " \t\n\r\f\v";

std::vector<Value> split(const std::string& s, const Value& sep, std::int64_t maxsplit) {
    std::vector<Value> out;
    if (is_none(sep)) {
        std::size_t i = 0;
        while (true) {
            while (i < s.size() && kWhitespace.find(s[i]) != std::string::npos) ++i;
            if (i >= s.size()) break;
            if (maxsplit >= 0 && static_cast<std::int64_t>(out.size()) == maxsplit) {
                std::string rest = s.substr(i);
                out.push_back(strip_chars(rest, kWhitespace, false, true));
                break;
            }
            std::size_t j = i;
            while (j < s.size() && kWhitespace.find(s[j]) == std::string::npos) ++j;
            out.push_back(s.substr(i, j - i));
            i = j;
        }
        return out;
    }
    const std::string& d = str_arg(sep, "separator");
    if (d.empty()) raise_py("ValueError", "empty separator");
    std::size_t i = 0;
    while (true) {
        if (maxsplit >= 0 && static_cast<std::int64_t>(out.size()) == maxsplit) break;
        std::size_t j = s.find(d, i);
        if (j == std::string::npos) break;
        out.push_back(s.substr(i, j - i));
        i = j + d.size();
    }
    out.push_back(s.substr(i));
    return out;
}

std::string replace_all(const std::string& s, const std::string& from, const std::string& to, std::int64_t count) {
    std::string out;
    std::size_t i = 0;
    std::int64_t done = 0;
    if (from.empty()) {
        // Inserts `to` between characters, like the language does.
        for (char c : s) {
            if (count < 0 || done < count) {
                out += to;
                ++done;
            }
            out += c;
        }
        if (count < 0 || done < count) out += to;
        return out;
    }
    while (count < 0 || done < count) {
        std::size_t j = s.find(from, i);
        if (j == std::string::npos) break;
        out.append(s, i, j - i);
        out += to;
        i = j + from.size();
        ++done;
        if (out.size() > kMaxItems) raise_py("MemoryError", "string too large");
    }
    out.append(s, i, std::string::npos);
    return out;
}

std::int64_t count_sub(const std::string& s, const std::string& sub) {
    if (sub.empty()) return length(s) + 1;
    std::int64_t n = 0;
    for (std::size_t i = s.find(sub); i != std::string::npos; i = s.find(sub, i + sub.size())) ++n;
    return n;
}

bool affix_match(const std::string& s, const Value& affix, bool prefix) {
    auto one = [&](const Value& v) {
        const std::string& a = str_arg(v, prefix ? "startswith arg" : "endswith arg");
        if (a.size() > s.size()) return false;
        return prefix ? s.compare(0, a.size(), a) == 0 : s.compare(s.size() - a.size(), a.size(), a) == 0;
    };
    if (auto t = as_obj<TupleObj>(affix)) {
        return std::any_of((*t)->items.begin(), (*t)->items.end(), one);
    }
    return one(affix);
}

// str.format with positional, numbered and named fields; format specs are ignored.
std::string str_format(const std::string& fmt, const Args& args) {
    std::string out;
    std::size_t auto_index = 0;
    for (std::size_t i = 0; i < fmt.size(); ++i) {
        char c = fmt[i];
        if (c == '}') {
            if (i + 1 < fmt.size() && fmt[i + 1] == '}') ++i;
            out += '}';
            continue;
        }
        if (c != '{') {
            out += c;
            continue;
        }
        if (i + 1 < fmt.size() && fmt[i + 1] == '{') {
            out += '{';
            ++i;
            continue;
        }
        std::size_t close = fmt.find('}', i);
        if (close == std::string::npos) raise_py("ValueError", "Single '{' encountered in format string");
        std::string field = fmt.substr(i + 1, close - i - 1);
        i = close;
        bool repr = false;
        if (auto colon = field.find(':'); colon != std::string::npos) field.resize(colon);
        if (auto bang = field.find('!'); bang != std::string::npos) {
            repr = field.substr(bang + 1) == "r";
            field.resize(bang);
        }
        const Value* v = nullptr;
        if (field.empty() || std::all_of(field.begin(), field.end(), ::isdigit)) {
            std::size_t idx = field.empty() ? auto_index++ : std::stoul(field);
            if (idx >= args.positional.size()) raise_py("IndexError", "Replacement index out of range");
            v = &args.positional[idx];
        } else {
            v = args.keyword(field);
            if (!v) raise_py("KeyError", "'" + field + "'");
        }
        out += repr ? serialize(*v) : to_display(*v);
    }
    return out;
}

std::optional<std::int64_t> parse_int(std::string text, int base) {
    text = strip_chars(text, kWhitespace, true, true);
    text.erase(std::remove(text.begin(), text.end(), '_'), text.end());
    if (text.empty()) return std::nullopt;
    std::size_t start = (text[0] == '+' || text[0] == '-') ? 1 : 0;
    if (start == text.size()) return std::nullopt;
    errno = 0;
    char* end = nullptr;
    long long v = std::strtoll(text.c_str(), &end, base);
    if (*end != '\0') return std::nullopt;
    if (errno == ERANGE) raise_py("OverflowError", "int too large to convert");
    return static_cast<std::int64_t>(v);
}

std::optional<double> parse_float(std::string text) {
    text = strip_chars(text, kWhitespace, true, true);
    if (text.empty()) return std::nullopt;
    std::string lower;
    for (char c : text) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    std::string body = (lower[0] == '+' || lower[0] == '-') ? lower.substr(1) : lower;
    double sign = lower[0] == '-' ? -1.0 : 1.0;
    if (body == "inf" || body == "infinity") return sign * std::numeric_limits<double>::infinity();
    if (body == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (body.find_first_not_of("0123456789.e+-_") != std::string::npos) return std::nullopt;
    char* end = nullptr;
    double v = std::strtod(text.c_str(), &end);
    if (*end != '\0') return std::nullopt;
    return v;
}

bool less_than(const Value& a, const Value& b) { return compare_op(ast::CompareOp::Lt, a, b); }

// Stable merge sort that stays in bounds for inconsistent orderings.
void merge_sort(std::vector<std::size_t>& idx, const std::function<bool(std::size_t, std::size_t)>& less) {
    if (idx.size() < 2) return;
    std::vector<std::size_t> tmp(idx.size());
    for (std::size_t width = 1; width < idx.size(); width *= 2) {
        for (std::size_t lo = 0; lo < idx.size(); lo += 2 * width) {
            std::size_t mid = std::min(lo + width, idx.size());
            std::size_t hi = std::min(lo + 2 * width, idx.size());
            std::size_t i = lo, j = mid, k = lo;
            while (i < mid && j < hi) tmp[k++] = less(idx[j], idx[i]) ? idx[j++] : idx[i++];
            while (i < mid) tmp[k++] = idx[i++];
            while (j < hi) tmp[k++] = idx[j++];
        }
        idx.swap(tmp);
    }
}

const std::unordered_map<std::string, std::string>& exception_parents() {
    static const std::unordered_map<std::string, std::string> parents = {
        {"KeyError", "LookupError"},
        {"IndexError", "LookupError"},
        {"ZeroDivisionError", "ArithmeticError"},
        {"OverflowError", "ArithmeticError"},
        {"FloatingPointError", "ArithmeticError"},
        {"RecursionError", "RuntimeError"},
        {"NotImplementedError", "RuntimeError"},
        {"FileNotFoundError", "OSError"},
        {"FileExistsError", "OSError"},
        {"PermissionError", "OSError"},
        {"TimeoutError", "OSError"},
        {"ConnectionError", "OSError"},
        {"IOError", "OSError"},
        {"EnvironmentError", "OSError"},
        {"UnicodeDecodeError", "UnicodeError"},
        {"UnicodeEncodeError", "UnicodeError"},
        {"UnicodeError", "ValueError"},
        {"ModuleNotFoundError", "ImportError"},
        {"JSONDecodeError", "ValueError"},
    };
    return parents;
}

const std::unordered_map<std::string, std::unordered_set<std::string>>& method_table() {
    static const std::unordered_map<std::string, std::unordered_set<std::string>> table = {
        {"dict", {"get", "items", "keys", "values", "update", "pop", "setdefault", "copy", "clear"}},
        {"list", {"append", "extend", "pop", "insert", "index", "count", "copy", "remove", "clear", "reverse", "sort"}},
        {"set", {"add", "update", "discard", "remove", "copy"}},
        {"tuple", {"index", "count"}},
        {"str",
         {"strip", "lstrip", "rstrip", "split", "join", "format", "upper", "lower", "startswith", "endswith", "replace",
          "count", "find"}},
    };
    return table;
}

}  // namespace

std::string last_component(const std::string& dotted) {
    auto dot = dotted.rfind('.');
    return dot == std::string::npos ? dotted : dotted.substr(dot + 1);
}

bool exception_matches(const std::string& cls, const std::string& type) {
    if (cls == "BaseException") return true;
    if (cls == "Exception") return type != "SystemExit" && type != "KeyboardInterrupt" && type != "GeneratorExit";
    const auto& parents = exception_parents();
    for (std::string t = type;;) {
        if (t == cls) return true;
        auto it = parents.find(t);
        if (it == parents.end()) return false;
        t = it->second;
    }
}

bool handler_matches(const std::vector<std::string>& types, const std::string& type) {
    if (types.empty()) return true;
    std::string t = last_component(type);
    return std::any_of(types.begin(), types.end(),
                       [&](const std::string& cls) { return exception_matches(last_component(cls), t); });
}

bool has_method(const Value& v, const std::string& name) {
    const char* kind = nullptr;
    if (as_obj<DictObj>(v)) kind = "dict";
    else if (as_obj<ListObj>(v)) kind = "list";
    else if (as_obj<SetObj>(v)) kind = "set";
    else if (as_obj<TupleObj>(v)) kind = "tuple";
    else if (as_str(v)) kind = "str";
    if (!kind) return false;
    return method_table().at(kind).count(name) > 0;
}

// ---------------------------------------------------------------------------
// iteration

void Interpreter::for_each(const Value& iterable, const std::function<bool(const Value&)>& fn) {
    if (auto l = as_obj<ListObj>(iterable)) {
        auto keep = *l;  // the list may be rebound while iterating
        for (std::size_t i = 0; i < keep->items.size(); ++i) {
            Value item = keep->items[i];
            if (!fn(item)) return;
        }
        return;
    }
    auto each = [&](const std::vector<Value>& items) {
        for (const auto& item : items) {
            if (!fn(item)) return;
        }
    };
    if (auto t = as_obj<TupleObj>(iterable)) {
        auto keep = *t;
        each(keep->items);
        return;
    }
    if (auto d = as_obj<DictObj>(iterable)) {
        std::vector<Value> keys;
        for (const auto& [k, v] : (*d)->items) keys.push_back(k);
        each(keys);
        return;
    }
    if (auto s = as_obj<SetObj>(iterable)) {
        std::vector<Value> items = (*s)->items;
        each(items);
        return;
    }
    if (auto s = as_str(iterable)) {
        std::string text = *s;
        for (std::size_t i = 0; i < text.size();) {
            std::size_t j = i + 1;
            while (j < text.size() && (static_cast<unsigned char>(text[j]) & 0xC0) == 0x80) ++j;
            if (!fn(text.substr(i, j - i))) return;
            i = j;
        }
        return;
    }
    if (auto g = as_obj<GeneratorObj>(iterable)) {
        auto keep = *g;
        while (auto v = keep->next()) {
            if (!fn(*v)) return;
        }
        return;
    }
    if (auto o = as_obj<VersatileObj>(iterable)) {
        auto keep = *o;
        for (std::size_t i = 0, n = versatile_child_count(*keep); i < n; ++i) {
            if (!fn(versatile_child(*keep, i))) return;
        }
        return;
    }
    raise_py("TypeError", "'" + type_name(iterable) + "' object is not iterable");
}

std::vector<Value> Interpreter::materialize(const Value& iterable) {
    std::vector<Value> out;
    for_each(iterable, [&](const Value& v) {
        tick();
        out.push_back(v);
        return true;
    });
    return out;
}

// ---------------------------------------------------------------------------
// builtin functions

Value Interpreter::call_builtin(const std::string& name, Args& args, Frame& f) {
    auto& pos = args.positional;
    if (name == "print") {
        Value sep = arg_or(args, SIZE_MAX, "sep", std::string(" "));
        Value end = arg_or(args, SIZE_MAX, "end", std::string("\n"));
        std::string text;
        for (std::size_t i = 0; i < pos.size(); ++i) {
            if (i) text += is_none(sep) ? " " : str_arg(sep, "sep");
            text += to_display(pos[i]);
        }
        text += is_none(end) ? "\n" : str_arg(end, "end");
        const Value* file = args.keyword("file");
        (file && !is_none(*file) ? out_.stderr_text : out_.stdout_text) += text;
        return NoneV{};
    }
    if (name == "len") {
        arity(args, 1, 1, name);
        return length(pos[0]);
    }
    if (name == "isinstance") {
        arity(args, 2, 2, name);
        std::vector<std::string> classes;
        auto add = [&](const Value& v) {
            if (auto c = std::get_if<ExcClass>(&v)) classes.push_back(c->name);
            if (auto b = as_obj<BuiltinObj>(v)) classes.push_back((*b)->name);
        };
        if (auto t = as_obj<TupleObj>(pos[1])) {
            for (const auto& v : (*t)->items) add(v);
        } else {
            add(pos[1]);
        }
        return builtin_isinstance(pos[0], classes);
    }
    if (name == "super") return builtin_super();
    if (name == "any" || name == "all") {
        arity(args, 1, 1, name);
        bool want = name == "any";
        bool result = !want;
        for_each(pos[0], [&](const Value& v) {
            tick();
            if (truthy(v) == want) {
                result = want;
                return false;
            }
            return true;
        });
        return result;
    }
    if (name == "range") {
        arity(args, 1, 3, name);
        std::int64_t start = 0, stop = 0, step = 1;
        if (pos.size() == 1) {
            stop = int_arg(pos[0]);
        } else {
            start = int_arg(pos[0]);
            stop = int_arg(pos[1]);
            if (pos.size() == 3) step = int_arg(pos[2]);
        }
        if (step == 0) raise_py("ValueError", "range() arg 3 must not be zero");
        std::vector<Value> items;
        for (std::int64_t i = start; step > 0 ? i < stop : i > stop; i += step) {
            tick();
            items.emplace_back(i);
            if (step > 0 ? i > std::numeric_limits<std::int64_t>::max() - step
                         : i < std::numeric_limits<std::int64_t>::min() - step) {
                break;
            }
        }
        return make_list(std::move(items));
    }
    if (name == "str") {
        arity(args, 0, 1, name);
        return pos.empty() ? std::string() : to_display(pos[0]);
    }
    if (name == "repr") {
        arity(args, 1, 1, name);
        return serialize(pos[0]);
    }
    if (name == "bool") {
        arity(args, 0, 1, name);
        return !pos.empty() && truthy(pos[0]);
    }
    if (name == "int") {
        arity(args, 0, 2, name);
        if (pos.empty()) return std::int64_t{0};
        const Value& v = pos[0];
        if (pos.size() == 2) {
            const std::string& s = str_arg(v, "int() argument");
            std::int64_t base = int_arg(pos[1]);
            if (base != 0 && (base < 2 || base > 36)) raise_py("ValueError", "int() base must be >= 2 and <= 36, or 0");
            if (auto r = parse_int(s, static_cast<int>(base))) return *r;
            raise_py("ValueError", "invalid literal for int() with base " + std::to_string(base) + ": " + serialize(v));
        }
        if (auto i = std::get_if<std::int64_t>(&v)) return *i;
        if (auto b = std::get_if<bool>(&v)) return std::int64_t{*b ? 1 : 0};
        if (auto d = std::get_if<double>(&v)) {
            if (std::isnan(*d)) raise_py("ValueError", "cannot convert float NaN to integer");
            if (std::isinf(*d) || std::fabs(*d) >= 9.2233720368547758e18) {
                raise_py("OverflowError", "cannot convert float infinity to integer");
            }
            return static_cast<std::int64_t>(std::trunc(*d));
        }
        if (auto s = as_str(v)) {
            if (auto r = parse_int(*s, 10)) return *r;
            raise_py("ValueError", "invalid literal for int() with base 10: " + serialize(v));
        }
        if (is_versatile(v)) return kVersatileInt;
        raise_py("TypeError", "int() argument must be a string or a number, not '" + type_name(v) + "'");
    }
    if (name == "float") {
        arity(args, 0, 1, name);
        if (pos.empty()) return 0.0;
        const Value& v = pos[0];
        if (auto i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
        if (auto b = std::get_if<bool>(&v)) return *b ? 1.0 : 0.0;
        if (auto d = std::get_if<double>(&v)) return *d;
        if (auto s = as_str(v)) {
            if (auto r = parse_float(*s)) return *r;
            raise_py("ValueError", "could not convert string to float: " + serialize(v));
        }
        if (is_versatile(v)) return kVersatileFloat;
        raise_py("TypeError", "float() argument must be a string or a number, not '" + type_name(v) + "'");
    }
    if (name == "list" || name == "tuple" || name == "set") {
        arity(args, 0, 1, name);
        std::vector<Value> items = pos.empty() ? std::vector<Value>{} : materialize(pos[0]);
        if (name == "list") return make_list(std::move(items));
        if (name == "tuple") return make_tuple(std::move(items));
        Value s = make_set();
        for (const auto& v : items) (*as_obj<SetObj>(s))->add(v);
        return s;
    }
    if (name == "dict") {
        arity(args, 0, 1, name);
        Value d = make_dict();
        auto& obj = **as_obj<DictObj>(d);
        if (!pos.empty()) {
            if (auto src = as_obj<DictObj>(pos[0])) {
                for (const auto& [k, v] : (*src)->items) obj.set(k, v);
            } else {
                for (const auto& item : materialize(pos[0])) {
                    std::vector<Value> kv;
                    if (auto o = as_obj<VersatileObj>(item)) {
                        kv = {versatile_child(**o, 0), versatile_child(**o, 1)};
                    } else {
                        kv = materialize(item);
                    }
                    if (kv.size() != 2) raise_py("ValueError", "dictionary update sequence element has wrong length");
                    obj.set(kv[0], kv[1]);
                }
            }
        }
        for (const auto& [k, v] : args.keywords) obj.set(k, v);
        return d;
    }
    if (name == "enumerate") {
        arity(args, 1, 2, name);
        std::int64_t i = int_arg(arg_or(args, 1, "start", std::int64_t{0}));
        std::vector<Value> items;
        for (auto& v : materialize(pos[0])) items.push_back(make_tuple({i++, std::move(v)}));
        return make_list(std::move(items));
    }
    if (name == "sorted") {
        arity(args, 1, 1, name);
        std::vector<Value> items = materialize(pos[0]);
        Value key = arg_or(args, SIZE_MAX, "key", NoneV{});
        bool reverse = truthy(arg_or(args, SIZE_MAX, "reverse", false));
        std::vector<Value> keys;
        if (is_none(key)) {
            keys = items;
        } else {
            for (const auto& v : items) {
                Args a{{v}, {}};
                keys.push_back(call_value(key, a, f, nullptr));
            }
        }
        std::vector<std::size_t> idx(items.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        merge_sort(idx, [&](std::size_t a, std::size_t b) {
            return reverse ? less_than(keys[b], keys[a]) : less_than(keys[a], keys[b]);
        });
        std::vector<Value> out;
        out.reserve(idx.size());
        for (auto i : idx) out.push_back(items[i]);
        return make_list(std::move(out));
    }
    if (name == "min" || name == "max") {
        if (pos.empty()) raise_py("TypeError", name + " expected at least 1 argument, got 0");
        std::vector<Value> items = pos.size() == 1 ? materialize(pos[0]) : pos;
        if (items.empty()) {
            if (const Value* d = args.keyword("default")) return *d;
            raise_py("ValueError", name + "() arg is an empty sequence");
        }
        const Value* key = args.keyword("key");
        auto key_of = [&](const Value& v) {
            if (!key || is_none(*key)) return v;
            Args a{{v}, {}};
            return call_value(*key, a, f, nullptr);
        };
        std::size_t best = 0;
        Value best_key = key_of(items[0]);
        for (std::size_t i = 1; i < items.size(); ++i) {
            Value k = key_of(items[i]);
            if (name == "min" ? less_than(k, best_key) : less_than(best_key, k)) {
                best = i;
                best_key = k;
            }
        }
        return items[best];
    }
    if (name == "abs") {
        arity(args, 1, 1, name);
        const Value& v = pos[0];
        if (auto i = std::get_if<std::int64_t>(&v)) {
            if (*i == std::numeric_limits<std::int64_t>::min()) raise_py("OverflowError", "integer overflow");
            return std::int64_t{*i < 0 ? -*i : *i};
        }
        if (auto b = std::get_if<bool>(&v)) return std::int64_t{*b ? 1 : 0};
        if (auto d = std::get_if<double>(&v)) return std::fabs(*d);
        if (is_versatile(v)) return kVersatileInt;
        raise_py("TypeError", "bad operand type for abs(): '" + type_name(v) + "'");
    }
    raise_py("NameError", "name '" + name + "' is not defined");
}

// ---------------------------------------------------------------------------
// methods on concrete values

Value Interpreter::call_method(const Value& self, const std::string& name, Args& args, Frame& f) {
    auto& pos = args.positional;
    if (auto dp = as_obj<DictObj>(self)) {
        DictObj& d = **dp;
        if (name == "get") {
            arity(args, 1, 2, name);
            const Value* v = d.find(pos[0]);
            return v ? *v : (pos.size() > 1 ? pos[1] : Value{NoneV{}});
        }
        if (name == "items" || name == "keys" || name == "values") {
            arity(args, 0, 0, name);
            std::vector<Value> out;
            out.reserve(d.items.size());
            for (const auto& [k, v] : d.items) {
                if (name == "items") out.push_back(make_tuple({k, v}));
                else out.push_back(name == "keys" ? k : v);
            }
            return make_list(std::move(out));
        }
        if (name == "update") {
            arity(args, 0, 1, name);
            if (!pos.empty()) {
                Args inner{{pos[0]}, {}};
                Value other = call_builtin("dict", inner, f);
                for (const auto& [k, v] : (*as_obj<DictObj>(other))->items) d.set(k, v);
            }
            for (const auto& [k, v] : args.keywords) d.set(k, v);
            return NoneV{};
        }
        if (name == "pop") {
            arity(args, 1, 2, name);
            if (const Value* v = d.find(pos[0])) {
                Value out = *v;
                d.erase(pos[0]);
                return out;
            }
            if (pos.size() > 1) return pos[1];
            raise_py("KeyError", serialize(pos[0]));
        }
        if (name == "setdefault") {
            arity(args, 1, 2, name);
            if (const Value* v = d.find(pos[0])) return *v;
            Value dflt = pos.size() > 1 ? pos[1] : Value{NoneV{}};
            d.set(pos[0], dflt);
            return dflt;
        }
        if (name == "copy") {
            Value out = make_dict();
            for (const auto& [k, v] : d.items) (*as_obj<DictObj>(out))->set(k, v);
            return out;
        }
        if (name == "clear") {
            d.items.clear();
            d.index.clear();
            return NoneV{};
        }
    }
    if (auto lp = as_obj<ListObj>(self)) {
        auto& items = (*lp)->items;
        auto norm = [&](std::int64_t i, bool clamp) {
            auto n = static_cast<std::int64_t>(items.size());
            if (i < 0) i += n;
            if (clamp) i = std::clamp<std::int64_t>(i, 0, n);
            return i;
        };
        if (name == "append") {
            arity(args, 1, 1, name);
            if (items.size() >= kMaxItems) raise_py("MemoryError", "list too large");
            items.push_back(pos[0]);
            return NoneV{};
        }
        if (name == "extend") {
            arity(args, 1, 1, name);
            auto extra = materialize(pos[0]);
            if (items.size() + extra.size() > kMaxItems) raise_py("MemoryError", "list too large");
            items.insert(items.end(), extra.begin(), extra.end());
            return NoneV{};
        }
        if (name == "pop") {
            arity(args, 0, 1, name);
            if (items.empty()) raise_py("IndexError", "pop from empty list");
            std::int64_t i = norm(pos.empty() ? -1 : int_arg(pos[0]), false);
            if (i < 0 || i >= static_cast<std::int64_t>(items.size())) raise_py("IndexError", "pop index out of range");
            Value out = items[static_cast<std::size_t>(i)];
            items.erase(items.begin() + i);
            return out;
        }
        if (name == "insert") {
            arity(args, 2, 2, name);
            std::int64_t i = norm(int_arg(pos[0]), true);
            items.insert(items.begin() + i, pos[1]);
            return NoneV{};
        }
        if (name == "index" || name == "remove") {
            arity(args, 1, 1, name);
            for (std::size_t i = 0; i < items.size(); ++i) {
                if (values_equal(items[i], pos[0])) {
                    if (name == "index") return static_cast<std::int64_t>(i);
                    items.erase(items.begin() + static_cast<std::ptrdiff_t>(i));
                    return NoneV{};
                }
            }
            raise_py("ValueError", serialize(pos[0]) + " is not in list");
        }
        if (name == "count") {
            arity(args, 1, 1, name);
            return static_cast<std::int64_t>(
                std::count_if(items.begin(), items.end(), [&](const Value& v) { return values_equal(v, pos[0]); }));
        }
        if (name == "copy") return make_list(items);
        if (name == "clear") {
            items.clear();
            return NoneV{};
        }
        if (name == "reverse") {
            std::reverse(items.begin(), items.end());
            return NoneV{};
        }
        if (name == "sort") {
            arity(args, 0, 0, name);
            Args inner{{self}, args.keywords};
            Value sorted = call_builtin("sorted", inner, f);
            items = (*as_obj<ListObj>(sorted))->items;
            return NoneV{};
        }
    }
    if (auto sp = as_obj<SetObj>(self)) {
        SetObj& s = **sp;
        if (name == "add") {
            arity(args, 1, 1, name);
            s.add(pos[0]);
            return NoneV{};
        }
        if (name == "update") {
            for (const auto& it : pos) {
                for (const auto& v : materialize(it)) s.add(v);
            }
            return NoneV{};
        }
        if (name == "discard" || name == "remove") {
            arity(args, 1, 1, name);
            if (!s.erase(pos[0]) && name == "remove") raise_py("KeyError", serialize(pos[0]));
            return NoneV{};
        }
        if (name == "copy") {
            Value out = make_set();
            for (const auto& v : s.items) (*as_obj<SetObj>(out))->add(v);
            return out;
        }
    }
    if (auto tp = as_obj<TupleObj>(self)) {
        const auto& items = (*tp)->items;
        arity(args, 1, 1, name);
        if (name == "count") {
            return static_cast<std::int64_t>(
                std::count_if(items.begin(), items.end(), [&](const Value& v) { return values_equal(v, pos[0]); }));
        }
        for (std::size_t i = 0; i < items.size(); ++i) {
            if (values_equal(items[i], pos[0])) return static_cast<std::int64_t>(i);
        }
        raise_py("ValueError", "tuple.index(x): x not in tuple");
    }
    if (auto sp = as_str(self)) {
        const std::string s = *sp;
        if (name == "strip" || name == "lstrip" || name == "rstrip") {
            arity(args, 0, 1, name);
            std::string chars = pos.empty() || is_none(pos[0]) ? kWhitespace : str_arg(pos[0], "strip arg");
            return strip_chars(s, chars, name != "rstrip", name != "lstrip");
        }
        if (name == "split") {
            arity(args, 0, 2, name);
            Value sep = arg_or(args, 0, "sep", NoneV{});
            std::int64_t maxsplit = int_arg(arg_or(args, 1, "maxsplit", std::int64_t{-1}));
            return make_list(split(s, sep, maxsplit));
        }
        if (name == "join") {
            arity(args, 1, 1, name);
            std::string out;
            std::size_t i = 0;
            for (const auto& v : materialize(pos[0])) {
                auto piece = as_str(v);
                if (!piece) {
                    raise_py("TypeError", "sequence item " + std::to_string(i) + ": expected str instance, " +
                                              type_name(v) + " found");
                }
                if (i++) out += s;
                out += *piece;
                if (out.size() > kMaxItems) raise_py("MemoryError", "string too large");
            }
            return out;
        }
        if (name == "format") return str_format(s, args);
        if (name == "upper" || name == "lower") {
            std::string out = s;
            for (auto& c : out) {
                c = static_cast<char>(name == "upper" ? std::toupper(static_cast<unsigned char>(c))
                                                      : std::tolower(static_cast<unsigned char>(c)));
            }
            return out;
        }
        if (name == "startswith" || name == "endswith") {
            arity(args, 1, 1, name);
            return affix_match(s, pos[0], name == "startswith");
        }
        if (name == "replace") {
            arity(args, 2, 3, name);
            std::int64_t count = pos.size() > 2 ? int_arg(pos[2]) : -1;
            return replace_all(s, str_arg(pos[0], "replace arg"), str_arg(pos[1], "replace arg"), count);
        }
        if (name == "count") {
            arity(args, 1, 1, name);
            return count_sub(s, str_arg(pos[0], "count arg"));
        }
        if (name == "find") {
            arity(args, 1, 1, name);
            auto at = s.find(str_arg(pos[0], "find arg"));
            if (at == std::string::npos) return std::int64_t{-1};
            return length(s.substr(0, at));
        }
    }
    raise_py("AttributeError", "'" + type_name(self) + "' object has no attribute '" + name + "'");
}

}  // namespace pairguard::detail

namespace pairguard {

bool builtin_isinstance(const Value& v, const std::vector<std::string>& classes) {
    using detail::last_component;
    for (const auto& cls : classes) {
        std::string last = last_component(cls);
        if (auto o = as_obj<VersatileObj>(v)) {
            const std::string& t = (*o)->assigned_type;
            if (!t.empty() && (t == cls || last_component(t) == last)) return true;
            continue;
        }
        if (last == "object") return true;
        if (auto e = as_obj<ExceptionObj>(v)) {
            if (detail::exception_matches(last, last_component((*e)->type_name))) return true;
            continue;
        }
        std::string t = type_name(v);
        if (t == last) return true;
        if (t == "bool" && last == "int") return true;
    }
    return false;
}

}  // namespace pairguard
