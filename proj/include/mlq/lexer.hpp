#pragma once

#include <string_view>
#include <vector>

#include "mlq/token.hpp"

namespace mlq {

struct LexResult {
    std::vector<Token> tokens;   // ends with an EndOfInput token
    std::vector<Diagnostic> diagnostics;
};

// Tokenize UTF-8 model text. Never throws on malformed input; problems
// (unterminated string/comment, stray bytes) become diagnostics. Tokens plus
// their trivia reconstruct the input byte-for-byte.
LexResult tokenize(std::string_view source, const std::string& path = "");

} // namespace mlq
