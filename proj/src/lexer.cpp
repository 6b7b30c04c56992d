#include "pairguard/lexer.hpp"

#include <cctype>
#include <cstdint>

namespace pairguard {

SyntaxError::SyntaxError(int line, int column, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) +
                         ": " + message),
      line_(line),
      column_(column),
      message_(message) {}

namespace {

bool is_ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_' ||
           static_cast<unsigned char>(c) >= 0x80;
}

bool is_ident_char(char c) {
    return is_ident_start(c) || std::isdigit(static_cast<unsigned char>(c));
}

void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

// Three-character operators first, then two, then one.
constexpr std::string_view kOps3[] = {"//="};
constexpr std::string_view kOps2[] = {"**", "//", "==", "!=", "<=", ">=", "+=", "-=", "*=", "/=", "%="};
constexpr std::string_view kOps1 = "+-*/%<>=()[]{},:.;";

}  // namespace

std::string decode_escapes(std::string_view body, int line, int column) {
    std::string out;
    out.reserve(body.size());
    for (std::size_t i = 0; i < body.size(); ++i) {
        char c = body[i];
        if (c != '\\' || i + 1 >= body.size()) {
            out += c;
            continue;
        }
        char e = body[++i];
        switch (e) {
            case 'n': out += '\n'; break;
            case 't': out += '\t'; break;
            case 'r': out += '\r'; break;
            case '0': out += '\0'; break;
            case 'a': out += '\a'; break;
            case 'b': out += '\b'; break;
            case 'f': out += '\f'; break;
            case 'v': out += '\v'; break;
            case '\\': out += '\\'; break;
            case '\'': out += '\''; break;
            case '"': out += '"'; break;
            case '\n': break;  // line continuation inside a string
            case 'x':
            case 'u':
            case 'U': {
                std::size_t width = e == 'x' ? 2 : (e == 'u' ? 4 : 8);
                if (i + width >= body.size()) {
                    throw SyntaxError(line, column, "truncated \\" + std::string(1, e) + " escape");
                }
                std::uint32_t cp = 0;
                for (std::size_t k = 1; k <= width; ++k) {
                    char h = body[i + k];
                    if (!std::isxdigit(static_cast<unsigned char>(h))) {
                        throw SyntaxError(line, column, "invalid \\" + std::string(1, e) + " escape");
                    }
                    cp = cp * 16 + static_cast<std::uint32_t>(
                                       std::isdigit(static_cast<unsigned char>(h))
                                           ? h - '0'
                                           : std::tolower(static_cast<unsigned char>(h)) - 'a' + 10);
                }
                i += width;
                if (e == 'x') {
                    out += static_cast<char>(cp);
                } else {
                    append_utf8(out, cp);
                }
                break;
            }
            default:
                // Unknown escapes are kept verbatim.
                out += '\\';
                out += e;
        }
    }
    return out;
}

Lexer::Lexer(std::string_view source, int first_line, bool expression_mode)
    : src_(source), line_(first_line), expression_mode_(expression_mode) {}

char Lexer::peek(std::size_t ahead) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
}

void Lexer::fail(const std::string& message) const {
    throw SyntaxError(line_, static_cast<int>(pos_ - line_start_) + 1, message);
}

std::vector<Token> Lexer::tokenize() {
    std::vector<Token> out;
    std::vector<int> indents{0};
    int depth = 0;
    bool at_line_start = !expression_mode_;
    bool line_has_tokens = false;

    auto column = [&] { return static_cast<int>(pos_ - line_start_) + 1; };
    auto push = [&](TokenKind kind, std::string text, int line, int col) {
        out.push_back(Token{kind, std::move(text), line, col, line, false});
        line_has_tokens = true;
    };

    while (pos_ < src_.size()) {
        if (at_line_start) {
            at_line_start = false;
            int width = 0;
            while (peek() == ' ' || peek() == '\t') {
                width = peek() == '\t' ? (width / 8 + 1) * 8 : width + 1;
                ++pos_;
            }
            if (peek() == '\n' || peek() == '#' || peek() == '\r' || pos_ >= src_.size()) {
                // Blank or comment-only lines never affect indentation.
                while (pos_ < src_.size() && peek() != '\n') ++pos_;
                if (pos_ < src_.size()) {
                    ++pos_;
                    ++line_;
                    line_start_ = pos_;
                    at_line_start = true;
                }
                continue;
            }
            if (width > indents.back()) {
                indents.push_back(width);
                out.push_back(Token{TokenKind::Indent, "", line_, column(), line_, false});
            } else {
                while (width < indents.back()) {
                    indents.pop_back();
                    out.push_back(Token{TokenKind::Dedent, "", line_, column(), line_, false});
                }
                if (width != indents.back()) fail("unindent does not match any outer indentation level");
            }
        }

        char c = peek();
        if (c == ' ' || c == '\t' || c == '\r' || c == '\f') {
            ++pos_;
            continue;
        }
        if (c == '#') {
            while (pos_ < src_.size() && peek() != '\n') ++pos_;
            continue;
        }
        if (c == '\\' && (peek(1) == '\n' || (peek(1) == '\r' && peek(2) == '\n'))) {
            pos_ += peek(1) == '\r' ? 3 : 2;
            ++line_;
            line_start_ = pos_;
            continue;
        }
        if (c == '\n') {
            ++pos_;
            if (depth == 0 && !expression_mode_) {
                if (line_has_tokens) {
                    out.push_back(Token{TokenKind::Newline, "", line_, column(), line_, false});
                    line_has_tokens = false;
                }
                at_line_start = true;
            }
            ++line_;
            line_start_ = pos_;
            continue;
        }

        int line = line_;
        int col = column();

        if (is_ident_start(c)) {
            std::size_t start = pos_;
            while (is_ident_char(peek())) ++pos_;
            std::string word(src_.substr(start, pos_ - start));
            char q = peek();
            if ((q == '\'' || q == '"') && word.size() <= 2) {
                bool raw = false;
                bool fstr = false;
                bool valid = true;
                for (char p : word) {
                    char l = static_cast<char>(std::tolower(static_cast<unsigned char>(p)));
                    if (l == 'r') raw = true;
                    else if (l == 'f') fstr = true;
                    else if (l == 'u' && word.size() == 1) {}
                    else if (l == 'b') fail("byte strings are not supported");
                    else valid = false;
                }
                if (valid) {
                    lex_string(out, raw, fstr, line, col);
                    line_has_tokens = true;
                    continue;
                }
            }
            push(TokenKind::Name, std::move(word), line, col);
            continue;
        }
        if (c == '\'' || c == '"') {
            lex_string(out, false, false, line, col);
            line_has_tokens = true;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
            lex_number(out);
            line_has_tokens = true;
            continue;
        }

        std::string_view rest = src_.substr(pos_);
        std::string op;
        for (auto candidate : kOps3) {
            if (rest.substr(0, 3) == candidate) op = candidate;
        }
        if (op.empty()) {
            for (auto candidate : kOps2) {
                if (rest.substr(0, 2) == candidate) {
                    op = candidate;
                    break;
                }
            }
        }
        if (op.empty() && kOps1.find(c) != std::string_view::npos) op = std::string(1, c);
        if (op.empty()) fail(std::string("unexpected character '") + c + "'");
        if (op == "(" || op == "[" || op == "{") ++depth;
        if (op == ")" || op == "]" || op == "}") {
            if (depth == 0) fail("unmatched '" + op + "'");
            --depth;
        }
        pos_ += op.size();
        push(TokenKind::Op, std::move(op), line, col);
    }

    if (depth != 0) fail("unexpected end of input inside brackets");
    if (line_has_tokens && !expression_mode_) {
        out.push_back(Token{TokenKind::Newline, "", line_, column(), line_, false});
    }
    while (indents.size() > 1) {
        indents.pop_back();
        out.push_back(Token{TokenKind::Dedent, "", line_, column(), line_, false});
    }
    out.push_back(Token{TokenKind::End, "", line_, column(), line_, false});
    return out;
}

void Lexer::lex_string(std::vector<Token>& out, bool raw, bool fstring, int line, int column) {
    char quote = peek();
    bool triple = peek(1) == quote && peek(2) == quote;
    pos_ += triple ? 3 : 1;
    std::size_t start = pos_;
    for (;;) {
        if (pos_ >= src_.size()) fail("unterminated string literal");
        char c = peek();
        if (c == '\\') {
            if (peek(1) == '\n') {
                ++line_;
                line_start_ = pos_ + 2;
            }
            pos_ += 2;
            continue;
        }
        if (c == '\n') {
            if (!triple) fail("unterminated string literal");
            ++pos_;
            ++line_;
            line_start_ = pos_;
            continue;
        }
        if (c == quote && (!triple || (peek(1) == quote && peek(2) == quote))) break;
        ++pos_;
    }
    std::string_view body = src_.substr(start, pos_ - start);
    pos_ += triple ? 3 : 1;
    Token tok{TokenKind::String, "", line, column, line_, fstring};
    if (fstring) {
        // Fields are re-lexed by the parser; escapes in literal fragments are
        // decoded there (unless raw, marked by a leading sentinel).
        tok.text = (raw ? "r" : "n") + std::string(body);
    } else {
        tok.text = raw ? std::string(body) : decode_escapes(body, line, column);
    }
    out.push_back(std::move(tok));
}

void Lexer::lex_number(std::vector<Token>& out) {
    int line = line_;
    int col = static_cast<int>(pos_ - line_start_) + 1;
    std::size_t start = pos_;
    bool is_float = false;
    if (peek() == '0' && (peek(1) == 'x' || peek(1) == 'X' || peek(1) == 'o' || peek(1) == 'O' ||
                          peek(1) == 'b' || peek(1) == 'B')) {
        pos_ += 2;
        while (std::isxdigit(static_cast<unsigned char>(peek())) || peek() == '_') ++pos_;
    } else {
        while (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '_') ++pos_;
        if (peek() == '.' && !(peek(1) == '.')) {
            is_float = true;
            ++pos_;
            while (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '_') ++pos_;
        }
        if (peek() == 'e' || peek() == 'E') {
            std::size_t save = pos_;
            ++pos_;
            if (peek() == '+' || peek() == '-') ++pos_;
            if (std::isdigit(static_cast<unsigned char>(peek()))) {
                is_float = true;
                while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
            } else {
                pos_ = save;
            }
        }
    }
    if (is_ident_start(peek())) fail("invalid numeric literal");
    std::string text;
    for (char c : src_.substr(start, pos_ - start)) {
        if (c != '_') text += c;
    }
    out.push_back(Token{is_float ? TokenKind::Float : TokenKind::Int, std::move(text), line, col, line, false});
}

}  // namespace pairguard
