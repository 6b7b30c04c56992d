#include "pairguard/parser.hpp"

#include <cerrno>
#include <cstdlib>
#include <limits>
#include <set>
#include <sstream>

namespace pairguard {

namespace {

using namespace ast;

const std::set<std::string, std::less<>> kKeywords = {
    "False", "None",   "True",  "and",      "as",     "assert", "async", "await",
    "break", "class",  "continue", "def",   "del",    "elif",   "else",  "except",
    "finally", "for",  "from",  "global",   "if",     "import", "in",    "is",
    "lambda", "nonlocal", "not", "or",      "pass",   "raise",  "return", "try",
    "while", "with",   "yield"};

constexpr int kMaxDepth = 150;

template <typename T>
ExprPtr make_expr(int line, T node) {
    auto e = std::make_unique<Expr>();
    e->line = line;
    e->node = std::move(node);
    return e;
}

template <typename T>
StmtPtr make_stmt(int line, int end_line, T node) {
    auto s = std::make_unique<Stmt>();
    s->line = line;
    s->end_line = end_line;
    s->node = std::move(node);
    return s;
}

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    StmtPtr parse_single_def() {
        if (!check_name("def")) fail_here("expected a function definition");
        StmtPtr def = parse_def();
        if (peek().kind != TokenKind::End) fail_here("expected a single function definition");
        return def;
    }

    ExprPtr parse_standalone_expression() {
        ExprPtr e = parse_testlist();
        if (peek().kind != TokenKind::End) fail_here("unexpected token after expression");
        return e;
    }

private:
    // --- token helpers -----------------------------------------------------
    const Token& peek(std::size_t ahead = 0) const {
        std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
        return toks_[i];
    }
    const Token& advance() {
        const Token& t = toks_[pos_];
        if (pos_ + 1 < toks_.size()) ++pos_;
        last_line_ = t.end_line;
        return t;
    }
    bool check_op(std::string_view op, std::size_t ahead = 0) const {
        const Token& t = peek(ahead);
        return t.kind == TokenKind::Op && t.text == op;
    }
    bool check_name(std::string_view word, std::size_t ahead = 0) const {
        const Token& t = peek(ahead);
        return t.kind == TokenKind::Name && t.text == word;
    }
    bool accept_op(std::string_view op) {
        if (!check_op(op)) return false;
        advance();
        return true;
    }
    bool accept_name(std::string_view word) {
        if (!check_name(word)) return false;
        advance();
        return true;
    }
    void expect_op(std::string_view op) {
        if (!accept_op(op)) fail_here("expected '" + std::string(op) + "'");
    }
    void expect_name(std::string_view word) {
        if (!accept_name(word)) fail_here("expected '" + std::string(word) + "'");
    }
    std::string expect_identifier() {
        const Token& t = peek();
        if (t.kind != TokenKind::Name || kKeywords.count(t.text)) fail_here("expected an identifier");
        return advance().text;
    }
    [[noreturn]] void fail_here(const std::string& message) const {
        const Token& t = peek();
        std::string found;
        switch (t.kind) {
            case TokenKind::End: found = "end of input"; break;
            case TokenKind::Newline: found = "end of line"; break;
            case TokenKind::Indent: found = "indent"; break;
            case TokenKind::Dedent: found = "dedent"; break;
            default: found = "'" + t.text + "'";
        }
        throw SyntaxError(t.line, t.column, message + ", found " + found);
    }

    struct DepthGuard {
        explicit DepthGuard(Parser& p) : p(p) {
            if (++p.depth_ > kMaxDepth) p.fail_here("expression nested too deeply");
        }
        ~DepthGuard() { --p.depth_; }
        Parser& p;
    };

    // --- statements --------------------------------------------------------
    Block parse_suite() {
        Block block;
        if (peek().kind == TokenKind::Newline) {
            advance();
            if (peek().kind != TokenKind::Indent) fail_here("expected an indented block");
            advance();
            while (peek().kind != TokenKind::Dedent && peek().kind != TokenKind::End) {
                parse_statement(block);
            }
            if (peek().kind == TokenKind::Dedent) advance();
        } else {
            parse_simple_line(block);
        }
        if (block.empty()) fail_here("expected a statement");
        return block;
    }

    void parse_statement(Block& out) {
        const Token& t = peek();
        if (t.kind == TokenKind::Indent) fail_here("unexpected indent");
        if (t.kind == TokenKind::Name) {
            const std::string& w = t.text;
            if (w == "def") return out.push_back(parse_def());
            if (w == "if") return out.push_back(parse_if());
            if (w == "for") return out.push_back(parse_for());
            if (w == "while") return out.push_back(parse_while());
            if (w == "try") return out.push_back(parse_try());
            if (w == "with") return out.push_back(parse_with());
            if (w == "class" || w == "import" || w == "from" || w == "global" || w == "nonlocal" ||
                w == "del" || w == "async" || w == "await") {
                fail_here("unsupported statement");
            }
        }
        parse_simple_line(out);
    }

    void parse_simple_line(Block& out) {
        out.push_back(parse_small_statement());
        while (accept_op(";")) {
            if (peek().kind == TokenKind::Newline || peek().kind == TokenKind::End) break;
            out.push_back(parse_small_statement());
        }
        if (peek().kind == TokenKind::Newline) {
            advance();
        } else if (peek().kind != TokenKind::End && peek().kind != TokenKind::Dedent) {
            fail_here("expected end of line");
        }
    }

    StmtPtr parse_small_statement() {
        int line = peek().line;
        if (accept_name("pass")) return make_stmt(line, last_line_, Pass{});
        if (accept_name("break")) return make_stmt(line, last_line_, Break{});
        if (accept_name("continue")) return make_stmt(line, last_line_, Continue{});
        if (accept_name("return")) {
            Return r;
            if (!at_statement_end()) r.value = parse_testlist();
            return make_stmt(line, last_line_, std::move(r));
        }
        if (accept_name("raise")) {
            Raise r;
            if (!at_statement_end()) {
                r.exc = parse_test();
                if (accept_name("from")) r.cause = parse_test();
            }
            return make_stmt(line, last_line_, std::move(r));
        }
        if (accept_name("assert")) {
            Assert a;
            a.test = parse_test();
            if (accept_op(",")) a.msg = parse_test();
            return make_stmt(line, last_line_, std::move(a));
        }
        if (check_name("yield")) {
            ExprPtr y = parse_yield();
            return make_stmt(line, last_line_, ExprStmt{std::move(y)});
        }

        ExprPtr first = parse_testlist();
        if (check_op("=")) {
            Assign assign;
            assign.targets.push_back(std::move(first));
            while (accept_op("=")) {
                ExprPtr rhs = check_name("yield") ? parse_yield() : parse_testlist();
                assign.targets.push_back(std::move(rhs));
            }
            assign.value = std::move(assign.targets.back());
            assign.targets.pop_back();
            for (const auto& target : assign.targets) validate_target(*target);
            return make_stmt(line, last_line_, std::move(assign));
        }
        static const std::pair<const char*, BinaryOp> kAug[] = {
            {"+=", BinaryOp::Add}, {"-=", BinaryOp::Sub},       {"*=", BinaryOp::Mul},
            {"/=", BinaryOp::Div}, {"//=", BinaryOp::FloorDiv}, {"%=", BinaryOp::Mod}};
        for (const auto& [spelling, op] : kAug) {
            if (accept_op(spelling)) {
                if (!first->as<Name>() && !first->as<Attribute>() && !first->as<Subscript>()) {
                    throw SyntaxError(first->line, 1, "illegal target for augmented assignment");
                }
                AugAssign aug{std::move(first), op, parse_testlist()};
                return make_stmt(line, last_line_, std::move(aug));
            }
        }
        if (check_op(":")) fail_here("annotations are not supported");
        return make_stmt(line, last_line_, ExprStmt{std::move(first)});
    }

    bool at_statement_end() const {
        const Token& t = peek();
        return t.kind == TokenKind::Newline || t.kind == TokenKind::End ||
               t.kind == TokenKind::Dedent || (t.kind == TokenKind::Op && t.text == ";");
    }

    void validate_target(const Expr& e) {
        if (e.as<Name>() || e.as<Attribute>() || e.as<Subscript>()) return;
        const std::vector<ExprPtr>* elts = nullptr;
        if (auto t = e.as<TupleExpr>()) elts = &t->elts;
        if (auto l = e.as<ListExpr>()) elts = &l->elts;
        if (!elts) throw SyntaxError(e.line, 1, "cannot assign to expression");
        for (const auto& sub : *elts) validate_target(*sub);
    }

    StmtPtr parse_def() {
        int line = peek().line;
        expect_name("def");
        FunctionDef def;
        def.name = expect_identifier();
        expect_op("(");
        def.params = parse_params(")");
        expect_op(")");
        expect_op(":");
        int header_end = last_line_;
        generator_flags_.push_back(false);
        def.body = parse_suite();
        def.is_generator = generator_flags_.back();
        generator_flags_.pop_back();
        return make_stmt(line, header_end, std::move(def));
    }

    std::vector<Param> parse_params(std::string_view closer) {
        std::vector<Param> params;
        std::set<std::string> seen;
        bool saw_default = false;
        while (!check_op(closer)) {
            if (check_op("*") || check_op("**") || check_op("/")) fail_here("star parameters are not supported");
            Param p;
            p.name = expect_identifier();
            if (!seen.insert(p.name).second) fail_here("duplicate parameter '" + p.name + "'");
            if (closer == ")" && check_op(":")) fail_here("annotations are not supported");
            if (accept_op("=")) {
                p.default_value = parse_test();
                saw_default = true;
            } else if (saw_default) {
                fail_here("non-default parameter follows default parameter");
            }
            params.push_back(std::move(p));
            if (!accept_op(",")) break;
        }
        return params;
    }

    StmtPtr parse_if() {
        int line = peek().line;
        advance();  // `if` or `elif`
        If node;
        node.test = parse_test();
        expect_op(":");
        int header_end = last_line_;
        node.body = parse_suite();
        if (check_name("elif")) {
            node.orelse.push_back(parse_if());
        } else if (check_name("else")) {
            node.else_line = peek().line;
            advance();
            expect_op(":");
            node.orelse = parse_suite();
        }
        return make_stmt(line, header_end, std::move(node));
    }

    StmtPtr parse_for() {
        int line = peek().line;
        expect_name("for");
        For node;
        node.target = parse_target_list();
        expect_name("in");
        node.iter = parse_testlist();
        expect_op(":");
        int header_end = last_line_;
        node.body = parse_suite();
        if (check_name("else")) fail_here("for-else is not supported");
        return make_stmt(line, header_end, std::move(node));
    }

    StmtPtr parse_while() {
        int line = peek().line;
        expect_name("while");
        While node;
        node.test = parse_test();
        expect_op(":");
        int header_end = last_line_;
        node.body = parse_suite();
        if (check_name("else")) fail_here("while-else is not supported");
        return make_stmt(line, header_end, std::move(node));
    }

    std::string parse_dotted_name() {
        std::string name = expect_identifier();
        while (accept_op(".")) name += "." + expect_identifier();
        return name;
    }

    StmtPtr parse_try() {
        int line = peek().line;
        expect_name("try");
        expect_op(":");
        int header_end = last_line_;
        Try node;
        node.body = parse_suite();
        bool saw_catch_all = false;
        while (check_name("except")) {
            ExceptHandler h;
            h.line = peek().line;
            advance();
            if (saw_catch_all) fail_here("default 'except:' must be last");
            if (!check_op(":")) {
                if (accept_op("(")) {
                    while (!check_op(")")) {
                        h.types.push_back(parse_dotted_name());
                        if (!accept_op(",")) break;
                    }
                    expect_op(")");
                    if (h.types.empty()) fail_here("expected an exception type");
                } else {
                    h.types.push_back(parse_dotted_name());
                }
                if (accept_name("as")) h.name = expect_identifier();
            } else {
                saw_catch_all = true;
            }
            expect_op(":");
            h.end_line = last_line_;
            h.body = parse_suite();
            node.handlers.push_back(std::move(h));
        }
        if (check_name("else")) {
            if (node.handlers.empty()) fail_here("'else' requires an 'except' clause");
            node.else_line = peek().line;
            advance();
            expect_op(":");
            node.orelse = parse_suite();
        }
        if (check_name("finally")) {
            node.finally_line = peek().line;
            advance();
            expect_op(":");
            node.finalbody = parse_suite();
        }
        if (node.handlers.empty() && node.finalbody.empty()) fail_here("expected 'except' or 'finally'");
        return make_stmt(line, header_end, std::move(node));
    }

    StmtPtr parse_with() {
        int line = peek().line;
        expect_name("with");
        With node;
        do {
            WithItem item;
            item.context = parse_test();
            if (accept_name("as")) {
                item.target = parse_target();
            }
            node.items.push_back(std::move(item));
        } while (accept_op(","));
        expect_op(":");
        int header_end = last_line_;
        node.body = parse_suite();
        return make_stmt(line, header_end, std::move(node));
    }

    // --- expressions -------------------------------------------------------
    ExprPtr parse_yield() {
        int line = peek().line;
        expect_name("yield");
        if (generator_flags_.empty()) fail_here("'yield' outside function");
        generator_flags_.back() = true;
        Yield y;
        if (!at_statement_end() && !check_op(")")) y.value = parse_testlist();
        return make_expr(line, std::move(y));
    }

    ExprPtr parse_target() {
        ExprPtr e = parse_atom_with_trailers();
        validate_target(*e);
        return e;
    }

    // Comma-separated targets for `for` loops and comprehensions.
    ExprPtr parse_target_list() {
        int line = peek().line;
        ExprPtr first = parse_target();
        if (!check_op(",")) return first;
        TupleExpr tuple;
        tuple.elts.push_back(std::move(first));
        while (accept_op(",")) {
            if (check_name("in")) break;
            tuple.elts.push_back(parse_target());
        }
        return make_expr(line, std::move(tuple));
    }

    ExprPtr parse_testlist() {
        int line = peek().line;
        ExprPtr first = parse_test();
        if (!check_op(",")) return first;
        TupleExpr tuple;
        tuple.elts.push_back(std::move(first));
        while (accept_op(",")) {
            if (at_statement_end() || check_op("=") || check_op(")") || check_op(":") ||
                peek().kind == TokenKind::End) {
                break;
            }
            tuple.elts.push_back(parse_test());
        }
        return make_expr(line, std::move(tuple));
    }

    ExprPtr parse_test() {
        DepthGuard guard(*this);
        if (check_name("lambda")) return parse_lambda();
        int line = peek().line;
        ExprPtr body = parse_or_test();
        if (!check_name("if")) return body;
        advance();
        ExprPtr test = parse_or_test();
        expect_name("else");
        ExprPtr orelse = parse_test();
        return make_expr(line, IfExp{std::move(test), std::move(body), std::move(orelse)});
    }

    ExprPtr parse_lambda() {
        int line = peek().line;
        expect_name("lambda");
        Lambda lam;
        lam.params = parse_params(":");
        expect_op(":");
        lam.body = parse_test();
        return make_expr(line, std::move(lam));
    }

    ExprPtr parse_or_test() {
        int line = peek().line;
        ExprPtr first = parse_and_test();
        if (!check_name("or")) return first;
        BoolOpExpr node{BoolOp::Or, {}};
        node.values.push_back(std::move(first));
        while (accept_name("or")) node.values.push_back(parse_and_test());
        return make_expr(line, std::move(node));
    }

    ExprPtr parse_and_test() {
        int line = peek().line;
        ExprPtr first = parse_not_test();
        if (!check_name("and")) return first;
        BoolOpExpr node{BoolOp::And, {}};
        node.values.push_back(std::move(first));
        while (accept_name("and")) node.values.push_back(parse_not_test());
        return make_expr(line, std::move(node));
    }

    ExprPtr parse_not_test() {
        DepthGuard guard(*this);
        int line = peek().line;
        if (accept_name("not")) {
            return make_expr(line, UnaryOpExpr{UnaryOp::Not, parse_not_test()});
        }
        return parse_comparison();
    }

    bool comparison_op(CompareOp& op) {
        static const std::pair<const char*, CompareOp> kOps[] = {
            {"==", CompareOp::Eq}, {"!=", CompareOp::NotEq}, {"<", CompareOp::Lt},
            {"<=", CompareOp::LtE}, {">", CompareOp::Gt},    {">=", CompareOp::GtE}};
        for (const auto& [spelling, candidate] : kOps) {
            if (accept_op(spelling)) {
                op = candidate;
                return true;
            }
        }
        if (accept_name("in")) {
            op = CompareOp::In;
            return true;
        }
        if (check_name("not") && check_name("in", 1)) {
            advance();
            advance();
            op = CompareOp::NotIn;
            return true;
        }
        if (accept_name("is")) {
            op = accept_name("not") ? CompareOp::IsNot : CompareOp::Is;
            return true;
        }
        return false;
    }

    ExprPtr parse_comparison() {
        int line = peek().line;
        ExprPtr left = parse_arith();
        CompareOp op;
        if (!comparison_op(op)) return left;
        Compare node;
        node.left = std::move(left);
        do {
            node.ops.push_back(op);
            node.comparators.push_back(parse_arith());
        } while (comparison_op(op));
        return make_expr(line, std::move(node));
    }

    ExprPtr parse_arith() {
        ExprPtr left = parse_term();
        for (;;) {
            BinaryOp op;
            if (check_op("+")) op = BinaryOp::Add;
            else if (check_op("-")) op = BinaryOp::Sub;
            else return left;
            advance();
            int line = left->line;
            left = make_expr(line, BinOp{op, std::move(left), parse_term()});
        }
    }

    ExprPtr parse_term() {
        ExprPtr left = parse_factor();
        for (;;) {
            BinaryOp op;
            if (check_op("*")) op = BinaryOp::Mul;
            else if (check_op("/")) op = BinaryOp::Div;
            else if (check_op("//")) op = BinaryOp::FloorDiv;
            else if (check_op("%")) op = BinaryOp::Mod;
            else return left;
            advance();
            int line = left->line;
            left = make_expr(line, BinOp{op, std::move(left), parse_factor()});
        }
    }

    ExprPtr parse_factor() {
        DepthGuard guard(*this);
        int line = peek().line;
        if (accept_op("-")) return make_expr(line, UnaryOpExpr{UnaryOp::Neg, parse_factor()});
        if (accept_op("+")) return make_expr(line, UnaryOpExpr{UnaryOp::Pos, parse_factor()});
        return parse_power();
    }

    ExprPtr parse_power() {
        ExprPtr base = parse_atom_with_trailers();
        if (!accept_op("**")) return base;
        int line = base->line;
        return make_expr(line, BinOp{BinaryOp::Pow, std::move(base), parse_factor()});
    }

    ExprPtr parse_atom_with_trailers() {
        ExprPtr e = parse_atom();
        for (;;) {
            int line = e->line;
            if (accept_op("(")) {
                e = parse_call(std::move(e));
            } else if (accept_op("[")) {
                ExprPtr index = parse_subscript_index();
                expect_op("]");
                e = make_expr(line, Subscript{std::move(e), std::move(index)});
            } else if (accept_op(".")) {
                std::string attr = expect_identifier();
                e = make_expr(line, Attribute{std::move(e), std::move(attr)});
            } else {
                return e;
            }
        }
    }

    ExprPtr parse_call(ExprPtr func) {
        int line = func->line;
        Call call;
        call.func = std::move(func);
        std::set<std::string> seen;
        while (!check_op(")")) {
            if (check_op("*") || check_op("**")) fail_here("star arguments are not supported");
            if (peek().kind == TokenKind::Name && check_op("=", 1)) {
                Keyword kw;
                kw.name = expect_identifier();
                if (!seen.insert(kw.name).second) fail_here("repeated keyword argument");
                advance();
                kw.value = parse_test();
                call.keywords.push_back(std::move(kw));
            } else {
                if (!call.keywords.empty()) fail_here("positional argument follows keyword argument");
                ExprPtr arg = parse_test();
                if (check_name("for")) {
                    if (!call.args.empty()) fail_here("generator expression must be parenthesized");
                    int gline = arg->line;
                    GeneratorExp gen{std::move(arg), parse_comprehension_clauses()};
                    call.args.push_back(make_expr(gline, std::move(gen)));
                    if (!check_op(")")) fail_here("generator expression must be parenthesized");
                    break;
                }
                call.args.push_back(std::move(arg));
            }
            if (!accept_op(",")) break;
        }
        expect_op(")");
        return make_expr(line, std::move(call));
    }

    ExprPtr parse_subscript_index() {
        int line = peek().line;
        auto slice_part = [&]() -> ExprPtr {
            if (check_op(":") || check_op("]") || check_op(",")) return nullptr;
            return parse_test();
        };
        auto one = [&]() -> ExprPtr {
            int l = peek().line;
            ExprPtr lower = slice_part();
            if (!accept_op(":")) {
                if (!lower) fail_here("expected an index");
                return lower;
            }
            ExprPtr upper = slice_part();
            if (check_op(":")) fail_here("slice steps are not supported");
            return make_expr(l, Slice{std::move(lower), std::move(upper)});
        };
        ExprPtr first = one();
        if (!check_op(",")) return first;
        TupleExpr tuple;
        tuple.elts.push_back(std::move(first));
        while (accept_op(",")) {
            if (check_op("]")) break;
            tuple.elts.push_back(one());
        }
        return make_expr(line, std::move(tuple));
    }

    std::vector<Comprehension> parse_comprehension_clauses() {
        std::vector<Comprehension> clauses;
        while (check_name("for")) {
            advance();
            Comprehension c;
            c.target = parse_target_list();
            expect_name("in");
            c.iter = parse_or_test();
            while (check_name("if")) {
                advance();
                c.ifs.push_back(parse_or_test());
            }
            clauses.push_back(std::move(c));
        }
        return clauses;
    }

    ExprPtr parse_atom() {
        DepthGuard guard(*this);
        const Token& t = peek();
        int line = t.line;
        switch (t.kind) {
            case TokenKind::Int: return make_expr(line, IntLit{parse_int(advance())});
            case TokenKind::Float: {
                const Token& f = advance();
                return make_expr(line, FloatLit{std::strtod(f.text.c_str(), nullptr)});
            }
            case TokenKind::String: return parse_strings();
            case TokenKind::Name: {
                if (t.text == "True") return advance(), make_expr(line, BoolLit{true});
                if (t.text == "False") return advance(), make_expr(line, BoolLit{false});
                if (t.text == "None") return advance(), make_expr(line, NoneLit{});
                if (t.text == "yield") fail_here("'yield' must be a statement");
                return make_expr(line, Name{expect_identifier()});
            }
            case TokenKind::Op: break;
            default: fail_here("expected an expression");
        }
        if (accept_op("(")) {
            if (accept_op(")")) return make_expr(line, TupleExpr{});
            if (check_name("yield")) fail_here("parenthesized 'yield' is not supported");
            ExprPtr first = parse_test();
            if (check_name("for")) {
                GeneratorExp gen{std::move(first), parse_comprehension_clauses()};
                expect_op(")");
                return make_expr(line, std::move(gen));
            }
            if (accept_op(")")) return first;
            TupleExpr tuple;
            tuple.elts.push_back(std::move(first));
            while (accept_op(",")) {
                if (check_op(")")) break;
                tuple.elts.push_back(parse_test());
            }
            expect_op(")");
            return make_expr(line, std::move(tuple));
        }
        if (accept_op("[")) {
            ListExpr list;
            if (accept_op("]")) return make_expr(line, std::move(list));
            ExprPtr first = parse_test();
            if (check_name("for")) {
                ListComp comp{std::move(first), parse_comprehension_clauses()};
                expect_op("]");
                return make_expr(line, std::move(comp));
            }
            list.elts.push_back(std::move(first));
            while (accept_op(",")) {
                if (check_op("]")) break;
                list.elts.push_back(parse_test());
            }
            expect_op("]");
            return make_expr(line, std::move(list));
        }
        if (accept_op("{")) {
            if (accept_op("}")) return make_expr(line, DictExpr{});
            ExprPtr first = parse_test();
            if (accept_op(":")) {
                DictExpr dict;
                dict.keys.push_back(std::move(first));
                dict.values.push_back(parse_test());
                if (check_name("for")) fail_here("dict comprehensions are not supported");
                while (accept_op(",")) {
                    if (check_op("}")) break;
                    dict.keys.push_back(parse_test());
                    expect_op(":");
                    dict.values.push_back(parse_test());
                }
                expect_op("}");
                return make_expr(line, std::move(dict));
            }
            if (check_name("for")) fail_here("set comprehensions are not supported");
            SetExpr set;
            set.elts.push_back(std::move(first));
            while (accept_op(",")) {
                if (check_op("}")) break;
                set.elts.push_back(parse_test());
            }
            expect_op("}");
            return make_expr(line, std::move(set));
        }
        fail_here("expected an expression");
    }

    std::int64_t parse_int(const Token& tok) {
        const std::string& s = tok.text;
        int base = 10;
        std::size_t skip = 0;
        if (s.size() > 2 && s[0] == '0') {
            char p = static_cast<char>(std::tolower(static_cast<unsigned char>(s[1])));
            if (p == 'x') base = 16, skip = 2;
            if (p == 'o') base = 8, skip = 2;
            if (p == 'b') base = 2, skip = 2;
        }
        if (base == 10 && s.size() > 1 && s[0] == '0' && s.find_first_not_of('0') != std::string::npos) {
            throw SyntaxError(tok.line, tok.column, "leading zeros in decimal integer literals are not permitted");
        }
        errno = 0;
        char* end = nullptr;
        long long v = std::strtoll(s.c_str() + skip, &end, base);
        if (errno == ERANGE || *end != '\0') {
            throw SyntaxError(tok.line, tok.column, "integer literal out of range: " + s);
        }
        return v;
    }

    ExprPtr parse_strings() {
        int line = peek().line;
        std::vector<Token> parts;
        bool any_f = false;
        while (peek().kind == TokenKind::String) {
            any_f = any_f || peek().fstring;
            parts.push_back(advance());
        }
        if (!any_f) {
            std::string value;
            for (const auto& p : parts) value += p.text;
            return make_expr(line, StrLit{std::move(value)});
        }
        FString fs;
        auto add_text = [&](std::string text) {
            if (text.empty()) return;
            if (!fs.parts.empty() && !fs.parts.back().expr) {
                fs.parts.back().text += text;
            } else {
                fs.parts.push_back(FStringPart{std::move(text), nullptr, false});
            }
        };
        for (const auto& p : parts) {
            if (!p.fstring) {
                add_text(p.text);
                continue;
            }
            split_fstring(p, add_text, fs);
        }
        return make_expr(line, std::move(fs));
    }

    template <typename AddText>
    void split_fstring(const Token& tok, AddText& add_text, FString& fs) {
        bool raw = tok.text[0] == 'r';
        std::string_view body = std::string_view(tok.text).substr(1);
        auto decode = [&](std::string_view piece) {
            return raw ? std::string(piece) : decode_escapes(piece, tok.line, tok.column);
        };
        std::size_t i = 0;
        std::size_t literal_start = 0;
        std::string literal;
        auto flush = [&](std::size_t upto) {
            literal += decode(body.substr(literal_start, upto - literal_start));
        };
        while (i < body.size()) {
            char c = body[i];
            if (c == '\\' && !raw) {
                i += 2;
                continue;
            }
            if (c == '{' && i + 1 < body.size() && body[i + 1] == '{') {
                flush(i + 1);
                i += 2;
                literal_start = i;
                continue;
            }
            if (c == '}') {
                if (i + 1 < body.size() && body[i + 1] == '}') {
                    flush(i + 1);
                    i += 2;
                    literal_start = i;
                    continue;
                }
                throw SyntaxError(tok.line, tok.column, "f-string: single '}' is not allowed");
            }
            if (c != '{') {
                ++i;
                continue;
            }
            flush(i);
            add_text(std::move(literal));
            literal.clear();
            std::size_t start = ++i;
            int depth = 0;
            char quote = 0;
            std::size_t expr_end = std::string_view::npos;
            bool repr = false;
            while (i < body.size()) {
                char d = body[i];
                if (quote) {
                    if (d == '\\') ++i;
                    else if (d == quote) quote = 0;
                    ++i;
                    continue;
                }
                if (d == '\'' || d == '"') quote = d;
                else if (d == '(' || d == '[' || d == '{') ++depth;
                else if ((d == ')' || d == ']' || d == '}') && depth > 0) --depth;
                else if (depth == 0 && d == '}') {
                    expr_end = i;
                    break;
                } else if (depth == 0 && d == '!' && i + 1 < body.size() && body[i + 1] != '=') {
                    char conv = i + 1 < body.size() ? body[i + 1] : '\0';
                    if ((conv != 'r' && conv != 's') || i + 2 >= body.size() || body[i + 2] != '}') {
                        throw SyntaxError(tok.line, tok.column, "f-string: unsupported conversion");
                    }
                    expr_end = i;
                    repr = conv == 'r';
                    i += 2;
                    break;
                } else if (depth == 0 && d == ':') {
                    throw SyntaxError(tok.line, tok.column, "f-string: format specifications are not supported");
                }
                ++i;
            }
            if (expr_end == std::string_view::npos) {
                throw SyntaxError(tok.line, tok.column, "f-string: expecting '}'");
            }
            std::string_view field = body.substr(start, expr_end - start);
            if (field.find_first_not_of(" \t\n") == std::string_view::npos) {
                throw SyntaxError(tok.line, tok.column, "f-string: empty expression not allowed");
            }
            ExprPtr inner = parse_expression(field, tok.line);
            fs.parts.push_back(FStringPart{"", std::move(inner), repr});
            ++i;  // closing brace
            literal_start = i;
        }
        flush(body.size());
        add_text(std::move(literal));
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    int last_line_ = 1;
    int depth_ = 0;
    std::vector<bool> generator_flags_;
};

std::string dedent(std::string_view source) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= source.size()) {
        std::size_t nl = source.find('\n', start);
        if (nl == std::string_view::npos) {
            lines.push_back(source.substr(start));
            break;
        }
        lines.push_back(source.substr(start, nl - start));
        start = nl + 1;
    }
    std::size_t common = std::numeric_limits<std::size_t>::max();
    for (auto line : lines) {
        std::size_t first = line.find_first_not_of(" \t\r");
        if (first == std::string_view::npos) continue;
        common = std::min(common, first);
    }
    if (common == 0 || common == std::numeric_limits<std::size_t>::max()) return std::string(source);
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        auto line = lines[i];
        out += line.substr(std::min(common, line.find_first_not_of(" \t\r") == std::string_view::npos
                                                ? line.size()
                                                : common));
        if (i + 1 < lines.size()) out += '\n';
    }
    return out;
}

int count_lines(std::string_view text) {
    if (text.empty()) return 0;
    int n = 1;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '\n' && i + 1 < text.size()) ++n;
    }
    return n;
}

}  // namespace

SourceFunction parse_function(std::string_view source) {
    std::string text = dedent(source);
    Parser parser(Lexer(text).tokenize());
    StmtPtr def = parser.parse_single_def();
    SourceFunction fn;
    const auto& fdef = std::get<FunctionDef>(def->node);
    fn.name = fdef.name;
    for (const auto& p : fdef.params) fn.params.push_back(p.name);
    fn.def = std::shared_ptr<const Stmt>(std::move(def));
    fn.source_text = std::move(text);
    fn.line_count = count_lines(fn.source_text);
    return fn;
}

ExprPtr parse_expression(std::string_view text, int first_line) {
    Parser parser(Lexer(text, first_line, true).tokenize());
    return parser.parse_standalone_expression();
}

}  // namespace pairguard
