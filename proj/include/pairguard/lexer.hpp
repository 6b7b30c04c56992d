#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pairguard {

class SyntaxError : public std::runtime_error {
public:
    SyntaxError(int line, int column, const std::string& message);

    int line() const { return line_; }
    int column() const { return column_; }
    const std::string& message() const { return message_; }

private:
    int line_;
    int column_;
    std::string message_;
};

enum class TokenKind { Name, Int, Float, String, Op, Newline, Indent, Dedent, End };

struct Token {
    TokenKind kind;
    std::string text;  // identifier, operator, number spelling, or decoded string body
    int line = 0;
    int column = 0;
    int end_line = 0;
    bool fstring = false;  // for String: body is undecoded f-string source
};

// Indentation-aware tokenizer. Lines are 1-based; `first_line` offsets every
// reported position (used when re-lexing f-string fields).
class Lexer {
public:
    explicit Lexer(std::string_view source, int first_line = 1, bool expression_mode = false);

    std::vector<Token> tokenize();

private:
    char peek(std::size_t ahead = 0) const;
    void lex_string(std::vector<Token>& out, bool raw, bool fstring, int line, int column);
    void lex_number(std::vector<Token>& out);
    [[noreturn]] void fail(const std::string& message) const;

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_;
    std::size_t line_start_ = 0;
    bool expression_mode_;
};

// Decodes backslash escapes of a non-raw string body.
std::string decode_escapes(std::string_view body, int line, int column);

}  // namespace pairguard
