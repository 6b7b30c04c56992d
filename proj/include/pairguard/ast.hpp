#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

// Syntax tree for the subject language. Every node carries the 1-based line
// of its first token, relative to the function's source text.
namespace pairguard::ast {

enum class BinaryOp { Add, Sub, Mul, Div, FloorDiv, Mod, Pow };
enum class UnaryOp { Neg, Pos, Not };
enum class CompareOp { Eq, NotEq, Lt, LtE, Gt, GtE, In, NotIn, Is, IsNot };
enum class BoolOp { And, Or };

const char* to_string(BinaryOp op);
const char* to_string(UnaryOp op);
const char* to_string(CompareOp op);
const char* to_string(BoolOp op);

struct Expr;
struct Stmt;
using ExprPtr = std::unique_ptr<Expr>;
using StmtPtr = std::unique_ptr<Stmt>;
using Block = std::vector<StmtPtr>;

struct NoneLit {};
struct BoolLit {
    bool value;
};
struct IntLit {
    std::int64_t value;
};
struct FloatLit {
    double value;
};
struct StrLit {
    std::string value;
};

// A literal fragment when `expr` is null, otherwise an interpolated field.
struct FStringPart {
    std::string text;
    ExprPtr expr;
    bool repr = false;
};
struct FString {
    std::vector<FStringPart> parts;
};

struct Name {
    std::string id;
};
struct ListExpr {
    std::vector<ExprPtr> elts;
};
struct TupleExpr {
    std::vector<ExprPtr> elts;
};
struct SetExpr {
    std::vector<ExprPtr> elts;
};
struct DictExpr {
    std::vector<ExprPtr> keys;
    std::vector<ExprPtr> values;
};

struct Comprehension {
    ExprPtr target;
    ExprPtr iter;
    std::vector<ExprPtr> ifs;
};
struct ListComp {
    ExprPtr elt;
    std::vector<Comprehension> generators;
};
struct GeneratorExp {
    ExprPtr elt;
    std::vector<Comprehension> generators;
};

struct Param {
    std::string name;
    ExprPtr default_value;
};
struct Lambda {
    std::vector<Param> params;
    ExprPtr body;
};

struct IfExp {
    ExprPtr test;
    ExprPtr body;
    ExprPtr orelse;
};
struct BoolOpExpr {
    BoolOp op;
    std::vector<ExprPtr> values;
};
struct Compare {
    ExprPtr left;
    std::vector<CompareOp> ops;
    std::vector<ExprPtr> comparators;
};
struct BinOp {
    BinaryOp op;
    ExprPtr left;
    ExprPtr right;
};
struct UnaryOpExpr {
    UnaryOp op;
    ExprPtr operand;
};
struct Keyword {
    std::string name;
    ExprPtr value;
};
struct Call {
    ExprPtr func;
    std::vector<ExprPtr> args;
    std::vector<Keyword> keywords;
};
struct Attribute {
    ExprPtr value;
    std::string attr;
};
struct Slice {
    ExprPtr lower;
    ExprPtr upper;
};
struct Subscript {
    ExprPtr value;
    ExprPtr index;  // may hold a Slice
};
struct Yield {
    ExprPtr value;
};

struct Expr {
    int line = 0;
    std::variant<NoneLit, BoolLit, IntLit, FloatLit, StrLit, FString, Name, ListExpr, TupleExpr,
                 SetExpr, DictExpr, ListComp, GeneratorExp, Lambda, IfExp, BoolOpExpr, Compare,
                 BinOp, UnaryOpExpr, Call, Attribute, Subscript, Slice, Yield>
        node;

    template <typename T>
    const T* as() const {
        return std::get_if<T>(&node);
    }
};

struct FunctionDef {
    std::string name;
    std::vector<Param> params;
    Block body;
    bool is_generator = false;
};
struct Assign {
    std::vector<ExprPtr> targets;
    ExprPtr value;
};
struct AugAssign {
    ExprPtr target;
    BinaryOp op;
    ExprPtr value;
};
struct Return {
    ExprPtr value;
};
struct Raise {
    ExprPtr exc;
    ExprPtr cause;
};
struct Assert {
    ExprPtr test;
    ExprPtr msg;
};
struct If {
    ExprPtr test;
    Block body;
    Block orelse;
    int else_line = 0;  // line of a plain `else:`; 0 for elif chains or no else
};
struct For {
    ExprPtr target;
    ExprPtr iter;
    Block body;
};
struct While {
    ExprPtr test;
    Block body;
};
struct ExceptHandler {
    std::vector<std::string> types;  // dotted names; empty means catch-all
    std::string name;
    Block body;
    int line = 0;
    int end_line = 0;
};
struct Try {
    Block body;
    std::vector<ExceptHandler> handlers;
    Block orelse;
    Block finalbody;
    int else_line = 0;
    int finally_line = 0;
};
struct WithItem {
    ExprPtr context;
    ExprPtr target;
};
struct With {
    std::vector<WithItem> items;
    Block body;
};
struct Pass {};
struct Break {};
struct Continue {};
struct ExprStmt {
    ExprPtr value;
};

struct Stmt {
    int line = 0;
    int end_line = 0;  // last line of a simple statement or of a compound header
    std::variant<FunctionDef, Assign, AugAssign, Return, Raise, Assert, If, For, While, Try, With,
                 Pass, Break, Continue, ExprStmt>
        node;

    template <typename T>
    const T* as() const {
        return std::get_if<T>(&node);
    }
};

}  // namespace pairguard::ast
