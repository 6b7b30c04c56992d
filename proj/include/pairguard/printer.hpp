#pragma once

#include <functional>
#include <string>

#include "pairguard/ast.hpp"
#include "pairguard/parser.hpp"

namespace pairguard {

// Optional identifier rewriting applied while rendering expressions.
using NameRewriter = std::function<std::string(const std::string&)>;

// Renders an expression as source text. The output parses back to an
// equivalent tree.
std::string render_expr(const ast::Expr& expr, const NameRewriter& rewrite = {});

// Pretty-prints a whole function definition.
std::string to_source(const SourceFunction& fn);
std::string to_source(const ast::Stmt& stmt);

// Structural dump without line information; equal dumps mean equal trees.
std::string dump(const ast::Stmt& stmt);
std::string dump(const ast::Expr& expr);

}  // namespace pairguard
