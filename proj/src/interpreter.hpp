#pragma once

#include <boost/coroutine2/all.hpp>

#include <cstdint>
#include <functional>
#include <set>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pairguard/engine.hpp"

namespace pairguard::detail {

using Coro = boost::coroutines2::coroutine<Value>;

// An exception raised by subject code, carrying an ExceptionObj value.
class SubjectException : public std::exception {
public:
    explicit SubjectException(Value exc) : exc_(std::move(exc)) {}
    const Value& exc() const { return exc_; }
    const char* what() const noexcept override { return "subject exception"; }

private:
    Value exc_;
};

// Budget, path length and other engine limits. Not catchable by subject code.
class EngineFault : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Scope {
    std::unordered_map<std::string, Value> vars;
    std::shared_ptr<Scope> parent;
};

struct Closure final : FunctionObj {
    const ast::FunctionDef* def = nullptr;
    const ast::Lambda* lambda = nullptr;
    std::vector<std::optional<Value>> defaults;  // one slot per parameter
    std::shared_ptr<Scope> env;

    const std::vector<ast::Param>& params() const { return def ? def->params : lambda->params; }
};

struct Frame {
    std::shared_ptr<Scope> scope;
    Coro::push_type* sink = nullptr;
    int depth = 0;
    int limit = 200;  // deepest call level allowed
    Value ret;
    std::vector<Value> handling;  // exceptions whose handlers are running
};

enum class Flow { Normal, Return, Break, Continue };

struct Args {
    std::vector<Value> positional;
    std::vector<std::pair<std::string, Value>> keywords;

    const Value* keyword(const std::string& name) const;
};

class GeneratorImpl;

class Interpreter {
public:
    Interpreter(const ComparisonProgram& program, Side side, ConsistencyMap& cmap, const StaticFacts& facts,
                const RunConfig& cfg, const Predictor& predictor, std::uint64_t seed);
    ~Interpreter();

    ExecutionOutcome run();

    // Counts one interpreter step against the budget.
    void tick();

private:
    friend class GeneratorImpl;

    // statements
    Flow exec_block(const ast::Block& block, Frame& f);
    Flow exec_stmt(const ast::Stmt& s, Frame& f);
    Flow exec_try(const ast::Try& t, Frame& f);
    void exec_raise(const ast::Raise& r, Frame& f);
    void assign(const ast::Expr& target, const Value& v, Frame& f);
    void aug_assign(const ast::AugAssign& a, Frame& f);

    // expressions
    Value eval(const ast::Expr& e, Frame& f);
    Value eval_name(const std::string& id, Frame& f);
    Value eval_call(const ast::Call& c, Frame& f);
    Value eval_fstring(const ast::FString& fs, Frame& f);
    Value eval_listcomp(const ast::ListComp& lc, Frame& f);
    Value eval_genexp(const ast::GeneratorExp& g, Frame& f);
    Value eval_compare(const ast::Compare& c, Frame& f);
    Args eval_args(const ast::Call& c, Frame& f);
    void comp_loop(const std::vector<ast::Comprehension>& gens, std::size_t i, Frame& f,
                   const std::function<void(Frame&)>& emit, std::optional<Value> first_iter = std::nullopt);

    const Value* lookup(const std::string& id, const Frame& f) const;
    bool is_exception_name(const std::string& id) const;

    // attribute, subscript and call protocol
    std::string base_path(const ast::Expr& base_expr, const Value& base);
    Value read_attr(const Value& base, const std::string& attr, const ast::Expr& base_expr);
    Value read_index(const Value& base, const Value& index, const ast::Expr& base_expr);
    void store_attr(const Value& base, const std::string& attr, const Value& v);
    void store_index(const Value& base, const Value& index, const Value& v);

    Value call_value(const Value& callee, Args& args, Frame& f, const ast::Expr* func);
    Value call_closure(const std::shared_ptr<Closure>& fn, Args& args, Frame& f, bool inject_missing);
    Value external_call(const std::string& path, const ast::Expr* func, const Args& args,
                        std::optional<AbstractKind> forced);
    Value call_builtin(const std::string& name, Args& args, Frame& f);
    Value call_method(const Value& self, const std::string& name, Args& args, Frame& f);
    Value builtin_super();

    Value inject(const std::string& path, QueryKind kind, const std::string& name,
                 std::optional<AbstractKind> forced = std::nullopt);
    void check_path(const std::string& path) const;

    // iteration; `fn` returns false to stop early
    void for_each(const Value& iterable, const std::function<bool(const Value&)>& fn);
    std::vector<Value> materialize(const Value& iterable);

    Value make_generator(std::string name, std::function<void(Coro::push_type&)> body);
    void close_generators();
    Value unwrap(const Value& v);

    void cover(int first, int last);
    const std::string& line_text(int line) const;

    const ComparisonProgram& program_;
    Side side_;
    ConsistencyMap& cmap_;
    const StaticFacts& facts_;
    const RunConfig& cfg_;
    const Predictor& predictor_;
    std::uint64_t seed_;
    const std::vector<std::string>& lines_;
    const std::set<int>& changed_;

    ExecutionOutcome out_;
    std::unordered_map<std::string, int> call_counts_;
    int super_count_ = 0;
    int current_line_ = 1;
    std::vector<std::weak_ptr<GeneratorImpl>> generators_;
    std::vector<char> covered_;
};

// Methods available on concrete built-in values.
bool has_method(const Value& v, const std::string& name);

// Except-clause matching by last name component with a small hierarchy.
bool exception_matches(const std::string& cls, const std::string& type);
bool handler_matches(const std::vector<std::string>& types, const std::string& type);

std::string last_component(const std::string& dotted);

}  // namespace pairguard::detail
