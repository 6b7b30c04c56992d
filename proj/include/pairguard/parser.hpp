#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "pairguard/ast.hpp"
#include "pairguard/lexer.hpp"

namespace pairguard {

// One parsed function definition. The AST is immutable and shared, so copies
// are cheap and may be handed to several engine instances.
struct SourceFunction {
    std::string name;
    std::vector<std::string> params;
    std::shared_ptr<const ast::Stmt> def;  // holds an ast::FunctionDef
    std::string source_text;
    int line_count = 0;

    const ast::FunctionDef& function() const { return std::get<ast::FunctionDef>(def->node); }
    const ast::Block& body() const { return function().body; }
};

// Parses a single top-level `def`. Common leading indentation is removed
// first so methods copied out of a class body parse as-is.
SourceFunction parse_function(std::string_view source);

// Parses a standalone expression (used for f-string fields and tests).
ast::ExprPtr parse_expression(std::string_view text, int first_line = 1);

}  // namespace pairguard
