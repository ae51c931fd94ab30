#pragma once

#include <string>
#include <vector>

#include "mlq/diag.hpp"

namespace mlq {

enum class TokenKind {
    Keyword,
    Identifier,
    IntLiteral,
    FloatLiteral,
    StringLiteral,
    Punctuation,      // { } ( ) : , = ! ? . -> == != <= >= < > + - * / @... see lexer
    AnnotationMarker, // '@' immediately followed by an identifier, e.g. @dalib
    EndOfInput,
};

struct Token {
    TokenKind kind = TokenKind::EndOfInput;
    std::string lexeme;   // exact source bytes of the token
    std::string trivia;   // whitespace/comments preceding this token, byte-exact
    Span span;
};

const char* token_kind_name(TokenKind k);

// True for words the lexer reserves (structural keywords, DA parameters,
// type names, literals and logical operators).
bool is_keyword(const std::string& word);

} // namespace mlq
