#include "pairguard/printer.hpp"

#include <sstream>

#include "pairguard/pyfmt.hpp"

namespace pairguard {

using namespace ast;

const char* ast::to_string(BinaryOp op) {
    switch (op) {
        case BinaryOp::Add: return "+";
        case BinaryOp::Sub: return "-";
        case BinaryOp::Mul: return "*";
        case BinaryOp::Div: return "/";
        case BinaryOp::FloorDiv: return "//";
        case BinaryOp::Mod: return "%";
        case BinaryOp::Pow: return "**";
    }
    return "?";
}

const char* ast::to_string(UnaryOp op) {
    switch (op) {
        case UnaryOp::Neg: return "-";
        case UnaryOp::Pos: return "+";
        case UnaryOp::Not: return "not";
    }
    return "?";
}

const char* ast::to_string(CompareOp op) {
    switch (op) {
        case CompareOp::Eq: return "==";
        case CompareOp::NotEq: return "!=";
        case CompareOp::Lt: return "<";
        case CompareOp::LtE: return "<=";
        case CompareOp::Gt: return ">";
        case CompareOp::GtE: return ">=";
        case CompareOp::In: return "in";
        case CompareOp::NotIn: return "not in";
        case CompareOp::Is: return "is";
        case CompareOp::IsNot: return "is not";
    }
    return "?";
}

const char* ast::to_string(BoolOp op) { return op == BoolOp::And ? "and" : "or"; }

namespace {

// Binding strength, loosest first.
enum Prec : int {
    kLambda = 0,
    kIfExp = 1,
    kOr = 2,
    kAnd = 3,
    kNot = 4,
    kCompare = 5,
    kAdd = 6,
    kMul = 7,
    kUnary = 8,
    kPower = 9,
    kPrimary = 10,
};

int binop_prec(BinaryOp op) {
    switch (op) {
        case BinaryOp::Add:
        case BinaryOp::Sub: return kAdd;
        case BinaryOp::Pow: return kPower;
        default: return kMul;
    }
}

class ExprPrinter {
public:
    ExprPrinter(const NameRewriter& rewrite, bool in_fstring) : rewrite_(rewrite), in_fstring_(in_fstring) {}

    std::string print(const Expr& e, int min_prec) {
        int p = precedence(e);
        std::string text = raw(e);
        // A lambda colon inside a replacement field would start a format spec.
        if (in_fstring_ && e.as<Lambda>()) return "(" + text + ")";
        return p < min_prec ? "(" + text + ")" : text;
    }

private:
    static int precedence(const Expr& e) {
        if (e.as<Lambda>()) return kLambda;
        if (e.as<IfExp>()) return kIfExp;
        if (auto b = e.as<BoolOpExpr>()) return b->op == BoolOp::Or ? kOr : kAnd;
        if (auto u = e.as<UnaryOpExpr>()) return u->op == UnaryOp::Not ? kNot : kUnary;
        if (e.as<Compare>()) return kCompare;
        if (auto b = e.as<BinOp>()) return binop_prec(b->op);
        if (e.as<Yield>()) return kLambda - 1;
        return kPrimary;
    }

    std::string str_lit(const std::string& s) const {
        return in_fstring_ ? pyfmt::repr_string(s, '\'') : pyfmt::repr_string(s);
    }

    std::string join(const std::vector<ExprPtr>& elts, int min_prec = kLambda) {
        std::string out;
        for (std::size_t i = 0; i < elts.size(); ++i) {
            if (i) out += ", ";
            out += print(*elts[i], min_prec);
        }
        return out;
    }

    std::string params(const std::vector<Param>& ps) {
        std::string out;
        for (std::size_t i = 0; i < ps.size(); ++i) {
            if (i) out += ", ";
            out += ps[i].name;
            if (ps[i].default_value) out += "=" + print(*ps[i].default_value, kLambda);
        }
        return out;
    }

    std::string comprehension(const std::vector<Comprehension>& gens) {
        std::string out;
        for (const auto& g : gens) {
            out += " for " + print(*g.target, kPrimary) + " in " + print(*g.iter, kOr);
            for (const auto& cond : g.ifs) out += " if " + print(*cond, kOr);
        }
        return out;
    }

    std::string fstring(const FString& fs) {
        std::string body;
        for (const auto& part : fs.parts) {
            if (!part.expr) {
                for (char c : part.text) {
                    if (c == '{') body += "{{";
                    else if (c == '}') body += "}}";
                    else {
                        std::string piece = pyfmt::repr_string(std::string(1, c), '"');
                        body += piece.substr(1, piece.size() - 2);
                    }
                }
                continue;
            }
            ExprPrinter inner(rewrite_, true);
            std::string text = inner.print(*part.expr, kIfExp);
            body += "{";
            if (!text.empty() && text.front() == '{') body += " ";
            body += text;
            if (part.repr) body += "!r";
            body += "}";
        }
        return "f\"" + body + "\"";
    }

    std::string raw(const Expr& e) {
        struct Visitor {
            ExprPrinter& self;
            std::string operator()(const NoneLit&) { return "None"; }
            std::string operator()(const BoolLit& b) { return b.value ? "True" : "False"; }
            std::string operator()(const IntLit& i) { return std::to_string(i.value); }
            std::string operator()(const FloatLit& f) { return pyfmt::format_float(f.value); }
            std::string operator()(const StrLit& s) { return self.str_lit(s.value); }
            std::string operator()(const FString& f) { return self.fstring(f); }
            std::string operator()(const Name& n) { return self.rewrite_ ? self.rewrite_(n.id) : n.id; }
            std::string operator()(const ListExpr& l) { return "[" + self.join(l.elts) + "]"; }
            std::string operator()(const TupleExpr& t) {
                if (t.elts.size() == 1) return "(" + self.print(*t.elts[0], kLambda) + ",)";
                return "(" + self.join(t.elts) + ")";
            }
            std::string operator()(const SetExpr& s) { return "{" + self.join(s.elts) + "}"; }
            std::string operator()(const DictExpr& d) {
                std::string out = "{";
                for (std::size_t i = 0; i < d.keys.size(); ++i) {
                    if (i) out += ", ";
                    out += self.print(*d.keys[i], kLambda) + ": " + self.print(*d.values[i], kLambda);
                }
                return out + "}";
            }
            std::string operator()(const ListComp& c) {
                return "[" + self.print(*c.elt, kLambda) + self.comprehension(c.generators) + "]";
            }
            std::string operator()(const GeneratorExp& c) {
                return "(" + self.print(*c.elt, kLambda) + self.comprehension(c.generators) + ")";
            }
            std::string operator()(const Lambda& l) {
                std::string ps = self.params(l.params);
                return "lambda" + (ps.empty() ? "" : " " + ps) + ": " + self.print(*l.body, kLambda);
            }
            std::string operator()(const IfExp& i) {
                return self.print(*i.body, kOr) + " if " + self.print(*i.test, kOr) + " else " +
                       self.print(*i.orelse, kLambda);
            }
            std::string operator()(const BoolOpExpr& b) {
                int p = b.op == BoolOp::Or ? kOr : kAnd;
                std::string out;
                for (std::size_t i = 0; i < b.values.size(); ++i) {
                    if (i) out += std::string(" ") + to_string(b.op) + " ";
                    out += self.print(*b.values[i], p + 1);
                }
                return out;
            }
            std::string operator()(const Compare& c) {
                std::string out = self.print(*c.left, kCompare + 1);
                for (std::size_t i = 0; i < c.ops.size(); ++i) {
                    out += std::string(" ") + to_string(c.ops[i]) + " " + self.print(*c.comparators[i], kCompare + 1);
                }
                return out;
            }
            std::string operator()(const BinOp& b) {
                int p = binop_prec(b.op);
                if (b.op == BinaryOp::Pow) {
                    return self.print(*b.left, kPrimary) + " ** " + self.print(*b.right, kUnary);
                }
                return self.print(*b.left, p) + " " + to_string(b.op) + " " + self.print(*b.right, p + 1);
            }
            std::string operator()(const UnaryOpExpr& u) {
                if (u.op == UnaryOp::Not) return "not " + self.print(*u.operand, kNot);
                return std::string(to_string(u.op)) + self.print(*u.operand, kUnary);
            }
            std::string operator()(const Call& c) {
                std::string out = self.print(*c.func, kPrimary) + "(";
                bool first = true;
                for (const auto& a : c.args) {
                    if (!first) out += ", ";
                    first = false;
                    out += self.print(*a, kLambda);
                }
                for (const auto& kw : c.keywords) {
                    if (!first) out += ", ";
                    first = false;
                    out += kw.name + "=" + self.print(*kw.value, kLambda);
                }
                return out + ")";
            }
            std::string operator()(const Attribute& a) {
                std::string base = self.print(*a.value, kPrimary);
                if (a.value->as<IntLit>() || a.value->as<FloatLit>()) base = "(" + base + ")";
                return base + "." + a.attr;
            }
            std::string operator()(const Subscript& s) {
                std::string index;
                if (auto t = s.index->as<TupleExpr>(); t && !t->elts.empty()) {
                    index = self.join(t->elts);
                    if (t->elts.size() == 1) index += ",";
                } else {
                    index = self.print(*s.index, kLambda);
                }
                return self.print(*s.value, kPrimary) + "[" + index + "]";
            }
            std::string operator()(const Slice& s) {
                std::string out;
                if (s.lower) out += self.print(*s.lower, kLambda);
                out += ":";
                if (s.upper) out += self.print(*s.upper, kLambda);
                return out;
            }
            std::string operator()(const Yield& y) {
                return y.value ? "yield " + self.print(*y.value, kLambda) : "yield";
            }
        };
        return std::visit(Visitor{*this}, e.node);
    }

    const NameRewriter& rewrite_;
    bool in_fstring_;
};

class StmtPrinter {
public:
    std::string out;

    void block(const Block& b, int indent) {
        for (const auto& s : b) stmt(*s, indent);
    }

    void stmt(const Stmt& s, int indent) {
        std::string pad(static_cast<std::size_t>(indent) * 4, ' ');
        auto expr = [&](const Expr& e) { return render_expr(e); };
        auto line = [&](const std::string& text) { out += pad + text + "\n"; };
        struct Visitor {
            StmtPrinter& self;
            int indent;
            const std::string& pad;
            decltype(expr)& ex;
            decltype(line)& ln;

            void operator()(const FunctionDef& f) {
                std::string ps;
                for (std::size_t i = 0; i < f.params.size(); ++i) {
                    if (i) ps += ", ";
                    ps += f.params[i].name;
                    if (f.params[i].default_value) ps += "=" + ex(*f.params[i].default_value);
                }
                ln("def " + f.name + "(" + ps + "):");
                self.block(f.body, indent + 1);
            }
            void operator()(const Assign& a) {
                std::string text;
                for (const auto& t : a.targets) text += ex(*t) + " = ";
                ln(text + ex(*a.value));
            }
            void operator()(const AugAssign& a) {
                ln(ex(*a.target) + " " + to_string(a.op) + "= " + ex(*a.value));
            }
            void operator()(const Return& r) { ln(r.value ? "return " + ex(*r.value) : "return"); }
            void operator()(const Raise& r) {
                std::string text = "raise";
                if (r.exc) text += " " + ex(*r.exc);
                if (r.cause) text += " from " + ex(*r.cause);
                ln(text);
            }
            void operator()(const Assert& a) {
                ln("assert " + ex(*a.test) + (a.msg ? ", " + ex(*a.msg) : ""));
            }
            void operator()(const If& i) { emit_if(i, "if "); }
            void emit_if(const If& i, const std::string& keyword) {
                ln(keyword + ex(*i.test) + ":");
                self.block(i.body, indent + 1);
                if (i.orelse.empty()) return;
                const If* elif = i.orelse.size() == 1 && i.else_line == 0 ? i.orelse[0]->as<If>() : nullptr;
                if (elif) {
                    emit_if(*elif, "elif ");
                } else {
                    ln("else:");
                    self.block(i.orelse, indent + 1);
                }
            }
            void operator()(const For& f) {
                ln("for " + ex(*f.target) + " in " + ex(*f.iter) + ":");
                self.block(f.body, indent + 1);
            }
            void operator()(const While& w) {
                ln("while " + ex(*w.test) + ":");
                self.block(w.body, indent + 1);
            }
            void operator()(const Try& t) {
                ln("try:");
                self.block(t.body, indent + 1);
                for (const auto& h : t.handlers) {
                    std::string head = "except";
                    if (h.types.size() == 1) head += " " + h.types[0];
                    if (h.types.size() > 1) {
                        head += " (";
                        for (std::size_t k = 0; k < h.types.size(); ++k) head += (k ? ", " : "") + h.types[k];
                        head += ")";
                    }
                    if (!h.name.empty()) head += " as " + h.name;
                    ln(head + ":");
                    self.block(h.body, indent + 1);
                }
                if (!t.orelse.empty()) {
                    ln("else:");
                    self.block(t.orelse, indent + 1);
                }
                if (!t.finalbody.empty()) {
                    ln("finally:");
                    self.block(t.finalbody, indent + 1);
                }
            }
            void operator()(const With& w) {
                std::string text = "with ";
                for (std::size_t k = 0; k < w.items.size(); ++k) {
                    if (k) text += ", ";
                    text += ex(*w.items[k].context);
                    if (w.items[k].target) text += " as " + ex(*w.items[k].target);
                }
                ln(text + ":");
                self.block(w.body, indent + 1);
            }
            void operator()(const Pass&) { ln("pass"); }
            void operator()(const Break&) { ln("break"); }
            void operator()(const Continue&) { ln("continue"); }
            void operator()(const ExprStmt& e) { ln(ex(*e.value)); }
        };
        std::visit(Visitor{*this, indent, pad, expr, line}, s.node);
    }
};

// --- structural dump -------------------------------------------------------

class Dumper {
public:
    std::string out;

    void expr(const Expr* e) {
        if (!e) {
            out += "_";
            return;
        }
        struct Visitor {
            Dumper& d;
            void operator()(const NoneLit&) { d.out += "None"; }
            void operator()(const BoolLit& b) { d.out += b.value ? "True" : "False"; }
            void operator()(const IntLit& i) { d.out += "Int(" + std::to_string(i.value) + ")"; }
            void operator()(const FloatLit& f) { d.out += "Float(" + pyfmt::format_float(f.value) + ")"; }
            void operator()(const StrLit& s) { d.out += "Str(" + pyfmt::repr_string(s.value) + ")"; }
            void operator()(const FString& f) {
                d.out += "FString(";
                for (const auto& p : f.parts) {
                    if (p.expr) {
                        d.out += p.repr ? "Field!r(" : "Field(";
                        d.expr(p.expr.get());
                        d.out += ")";
                    } else {
                        d.out += "Text(" + pyfmt::repr_string(p.text) + ")";
                    }
                    d.out += ",";
                }
                d.out += ")";
            }
            void operator()(const Name& n) { d.out += "Name(" + n.id + ")"; }
            void operator()(const ListExpr& l) { d.seq("List", l.elts); }
            void operator()(const TupleExpr& t) { d.seq("Tuple", t.elts); }
            void operator()(const SetExpr& s) { d.seq("Set", s.elts); }
            void operator()(const DictExpr& x) {
                d.out += "Dict(";
                for (std::size_t i = 0; i < x.keys.size(); ++i) {
                    d.expr(x.keys[i].get());
                    d.out += ":";
                    d.expr(x.values[i].get());
                    d.out += ",";
                }
                d.out += ")";
            }
            void operator()(const ListComp& c) { d.comp("ListComp", *c.elt, c.generators); }
            void operator()(const GeneratorExp& c) { d.comp("GenExp", *c.elt, c.generators); }
            void operator()(const Lambda& l) {
                d.out += "Lambda(";
                d.params(l.params);
                d.expr(l.body.get());
                d.out += ")";
            }
            void operator()(const IfExp& i) { d.call("IfExp", {i.test.get(), i.body.get(), i.orelse.get()}); }
            void operator()(const BoolOpExpr& b) { d.seq(std::string("BoolOp:") + to_string(b.op), b.values); }
            void operator()(const Compare& c) {
                d.out += "Compare(";
                d.expr(c.left.get());
                for (std::size_t i = 0; i < c.ops.size(); ++i) {
                    d.out += std::string(" ") + to_string(c.ops[i]) + " ";
                    d.expr(c.comparators[i].get());
                }
                d.out += ")";
            }
            void operator()(const BinOp& b) {
                d.call(std::string("BinOp:") + to_string(b.op), {b.left.get(), b.right.get()});
            }
            void operator()(const UnaryOpExpr& u) {
                d.call(std::string("Unary:") + to_string(u.op), {u.operand.get()});
            }
            void operator()(const Call& c) {
                d.out += "Call(";
                d.expr(c.func.get());
                d.out += ";";
                for (const auto& a : c.args) {
                    d.expr(a.get());
                    d.out += ",";
                }
                for (const auto& k : c.keywords) {
                    d.out += k.name + "=";
                    d.expr(k.value.get());
                    d.out += ",";
                }
                d.out += ")";
            }
            void operator()(const Attribute& a) {
                d.out += "Attr(";
                d.expr(a.value.get());
                d.out += "." + a.attr + ")";
            }
            void operator()(const Subscript& s) { d.call("Subscript", {s.value.get(), s.index.get()}); }
            void operator()(const Slice& s) { d.call("Slice", {s.lower.get(), s.upper.get()}); }
            void operator()(const Yield& y) { d.call("Yield", {y.value.get()}); }
        };
        std::visit(Visitor{*this}, e->node);
    }

    void seq(const std::string& tag, const std::vector<ExprPtr>& elts) {
        out += tag + "(";
        for (const auto& e : elts) {
            expr(e.get());
            out += ",";
        }
        out += ")";
    }
    void call(const std::string& tag, std::initializer_list<const Expr*> parts) {
        out += tag + "(";
        for (const Expr* e : parts) {
            expr(e);
            out += ",";
        }
        out += ")";
    }
    void comp(const std::string& tag, const Expr& elt, const std::vector<Comprehension>& gens) {
        out += tag + "(";
        expr(&elt);
        for (const auto& g : gens) {
            out += " for ";
            expr(g.target.get());
            out += " in ";
            expr(g.iter.get());
            for (const auto& c : g.ifs) {
                out += " if ";
                expr(c.get());
            }
        }
        out += ")";
    }
    void params(const std::vector<Param>& ps) {
        out += "[";
        for (const auto& p : ps) {
            out += p.name;
            if (p.default_value) {
                out += "=";
                expr(p.default_value.get());
            }
            out += ",";
        }
        out += "]";
    }
    void block(const Block& b) {
        out += "{";
        for (const auto& s : b) {
            stmt(*s);
            out += ";";
        }
        out += "}";
    }
    void stmt(const Stmt& s) {
        struct Visitor {
            Dumper& d;
            void operator()(const FunctionDef& f) {
                d.out += "Def(" + f.name + (f.is_generator ? ",gen" : "");
                d.params(f.params);
                d.block(f.body);
                d.out += ")";
            }
            void operator()(const Assign& a) {
                d.out += "Assign(";
                for (const auto& t : a.targets) {
                    d.expr(t.get());
                    d.out += "=";
                }
                d.expr(a.value.get());
                d.out += ")";
            }
            void operator()(const AugAssign& a) {
                d.out += std::string("Aug") + to_string(a.op) + "(";
                d.expr(a.target.get());
                d.out += ",";
                d.expr(a.value.get());
                d.out += ")";
            }
            void operator()(const Return& r) { d.call("Return", {r.value.get()}); }
            void operator()(const Raise& r) { d.call("Raise", {r.exc.get(), r.cause.get()}); }
            void operator()(const Assert& a) { d.call("Assert", {a.test.get(), a.msg.get()}); }
            void operator()(const If& i) {
                d.out += "If(";
                d.expr(i.test.get());
                d.block(i.body);
                d.block(i.orelse);
                d.out += ")";
            }
            void operator()(const For& f) {
                d.out += "For(";
                d.expr(f.target.get());
                d.expr(f.iter.get());
                d.block(f.body);
                d.out += ")";
            }
            void operator()(const While& w) {
                d.out += "While(";
                d.expr(w.test.get());
                d.block(w.body);
                d.out += ")";
            }
            void operator()(const Try& t) {
                d.out += "Try(";
                d.block(t.body);
                for (const auto& h : t.handlers) {
                    d.out += "Except[";
                    for (const auto& ty : h.types) d.out += ty + ",";
                    d.out += "]" + h.name;
                    d.block(h.body);
                }
                d.out += "else";
                d.block(t.orelse);
                d.out += "finally";
                d.block(t.finalbody);
                d.out += ")";
            }
            void operator()(const With& w) {
                d.out += "With(";
                for (const auto& item : w.items) {
                    d.expr(item.context.get());
                    d.out += " as ";
                    d.expr(item.target.get());
                    d.out += ",";
                }
                d.block(w.body);
                d.out += ")";
            }
            void operator()(const Pass&) { d.out += "Pass"; }
            void operator()(const Break&) { d.out += "Break"; }
            void operator()(const Continue&) { d.out += "Continue"; }
            void operator()(const ExprStmt& e) { d.call("Expr", {e.value.get()}); }
        };
        std::visit(Visitor{*this}, s.node);
    }
};

}  // namespace

std::string render_expr(const Expr& expr, const NameRewriter& rewrite) {
    ExprPrinter printer(rewrite, false);
    return printer.print(expr, kLambda - 1);
}

std::string to_source(const Stmt& stmt) {
    StmtPrinter printer;
    printer.stmt(stmt, 0);
    return printer.out;
}

std::string to_source(const SourceFunction& fn) { return to_source(*fn.def); }

std::string dump(const Stmt& stmt) {
    Dumper d;
    d.stmt(stmt);
    return d.out;
}

std::string dump(const Expr& expr) {
    Dumper d;
    d.expr(&expr);
    return d.out;
}

}  // namespace pairguard
