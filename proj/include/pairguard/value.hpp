#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "pairguard/ast.hpp"

namespace pairguard {

enum class AbstractKind {
    None,
    Boolean,
    Integer,
    Float,
    String,
    List,
    Tuple,
    Dictionary,
    Set,
    Callable,
    Resource,
    Object,
};
inline constexpr int kAbstractKindCount = 12;

const char* to_string(AbstractKind kind);
std::optional<AbstractKind> parse_abstract_kind(std::string_view name);

struct NoneV {};
struct ListObj;
struct TupleObj;
struct DictObj;
struct SetObj;
struct FunctionObj;
struct GeneratorObj;
struct VersatileObj;
struct ExceptionObj;
struct BuiltinObj;

// A class-like value for exception names, e.g. `ValueError`.
struct ExcClass {
    std::string name;
};

using Value = std::variant<NoneV, bool, std::int64_t, double, std::string, std::shared_ptr<ListObj>,
                           std::shared_ptr<TupleObj>, std::shared_ptr<DictObj>, std::shared_ptr<SetObj>,
                           std::shared_ptr<FunctionObj>, std::shared_ptr<GeneratorObj>,
                           std::shared_ptr<VersatileObj>, std::shared_ptr<ExceptionObj>,
                           std::shared_ptr<BuiltinObj>, ExcClass>;

// Raised by value operations for subject-level errors (TypeError and the like).
// The engine turns these into unintended exceptions.
class PyError : public std::runtime_error {
public:
    PyError(std::string type, const std::string& message)
        : std::runtime_error(type + ": " + message), type_(std::move(type)), message_(message) {}

    const std::string& type() const { return type_; }
    const std::string& message() const { return message_; }

private:
    std::string type_;
    std::string message_;
};

// Canonical hashing key; equal keys for values that compare equal
// (1 == 1.0 == True). Throws PyError for unhashable values.
std::string hash_key(const Value& v);

struct ListObj {
    std::vector<Value> items;
    std::string origin;  // injection path, empty when created by the program
};

struct TupleObj {
    std::vector<Value> items;
    std::string origin;
};

// Insertion-ordered mapping.
struct DictObj {
    std::vector<std::pair<Value, Value>> items;
    std::unordered_map<std::string, std::size_t> index;
    std::string origin;

    const Value* find(const Value& key) const;
    Value* find(const Value& key);
    void set(const Value& key, Value value);
    bool erase(const Value& key);
};

struct SetObj {
    std::vector<Value> items;
    std::unordered_map<std::string, std::size_t> index;
    std::string origin;

    bool contains(const Value& v) const { return index.count(hash_key(v)) > 0; }
    void add(const Value& v);
    bool erase(const Value& v);
};

struct ExceptionObj {
    std::string type_name;
    std::vector<Value> args;
    bool intentional = false;
};

// Builtin function, or a method bound to `self`.
struct BuiltinObj {
    std::string name;
    std::optional<Value> self;
};

enum class Flavor { Object, Resource, Callable };

struct VersatileObj {
    std::uint64_t seed = 0;
    std::string assigned_type;  // empty when absent
    Flavor flavor = Flavor::Object;
    std::string origin;
    std::map<std::string, Value> attrs;  // explicit assignments only
};

// Versatile internal representations.
inline constexpr std::int64_t kVersatileInt = 1;
inline constexpr double kVersatileFloat = 1.0;
inline constexpr const char* kVersatileStr = "a";

// Engine-defined closures and suspended generators.
struct FunctionObj {
    virtual ~FunctionObj() = default;
    std::string name;
};

struct GeneratorObj {
    virtual ~GeneratorObj() = default;
    // Next element, or nullopt once exhausted.
    virtual std::optional<Value> next() = 0;
    std::string name;
};

template <typename T>
const std::shared_ptr<T>* as_obj(const Value& v) {
    return std::get_if<std::shared_ptr<T>>(&v);
}

inline bool is_none(const Value& v) { return std::holds_alternative<NoneV>(v); }
inline bool is_versatile(const Value& v) { return std::holds_alternative<std::shared_ptr<VersatileObj>>(v); }

Value make_list(std::vector<Value> items = {}, std::string origin = {});
Value make_tuple(std::vector<Value> items = {}, std::string origin = {});
Value make_dict(std::string origin = {});
Value make_set(std::string origin = {});
Value make_exception(std::string type_name, std::vector<Value> args, bool intentional);

// Type name as the subject language reports it: int, str, NoneType, ...
std::string type_name(const Value& v);

// Injection path recorded on a container or Versatile, empty otherwise.
std::string origin_of(const Value& v);

bool truthy(const Value& v);
bool values_equal(const Value& a, const Value& b);
bool values_identical(const Value& a, const Value& b);

// Canonical text: sorted dict keys and set elements, depth-capped, cycle-safe.
std::string serialize(const Value& v);

// str() of a value: strings are unquoted, everything else serializes.
std::string to_display(const Value& v);

Value deep_copy(const Value& v);

// Versatile children produced by iteration and unpacking.
std::size_t versatile_child_count(const VersatileObj& o);
Value versatile_child(const VersatileObj& o, std::size_t index);

// Arithmetic with at least one Versatile operand. Never throws.
Value versatile_binop(ast::BinaryOp op, const Value& lhs, const Value& rhs);

// Full binary arithmetic; dispatches to versatile_binop when needed.
Value binary_op(ast::BinaryOp op, const Value& lhs, const Value& rhs);
Value unary_op(ast::UnaryOp op, const Value& v);

// Comparison operators other than `in`/`is` forms handled here as well.
bool compare_op(ast::CompareOp op, const Value& lhs, const Value& rhs);
bool contains(const Value& container, const Value& item);

// `%`-formatting of a string with an argument (or tuple of arguments).
std::string percent_format(const std::string& fmt, const Value& args);

// Element access and length helpers that raise PyError like the language.
std::int64_t length(const Value& v);

}  // namespace pairguard
