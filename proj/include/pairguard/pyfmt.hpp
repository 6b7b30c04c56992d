#pragma once

#include <string>
#include <string_view>

// Text formatting helpers that follow the subject language's literal syntax.
namespace pairguard::pyfmt {

// Shortest round-trip float text: `1.0`, `0.1`, `1e+16`, `inf`, `nan`.
std::string format_float(double value);

// Quoted string literal. With `force_quote` set, always uses that quote
// character and escapes it; otherwise picks single quotes unless the text
// contains a single quote and no double quote.
std::string repr_string(std::string_view text, char force_quote = 0);

}  // namespace pairguard::pyfmt
