#include "mlq/lexer.hpp"

#include <array>
#include <cctype>
#include <unordered_set>

namespace mlq {

const char* token_kind_name(TokenKind k) {
    switch (k) {
    case TokenKind::Keyword: return "keyword";
    case TokenKind::Identifier: return "identifier";
    case TokenKind::IntLiteral: return "integer-literal";
    case TokenKind::FloatLiteral: return "float-literal";
    case TokenKind::StringLiteral: return "string-literal";
    case TokenKind::Punctuation: return "punctuation";
    case TokenKind::AnnotationMarker: return "annotation-marker";
    case TokenKind::EndOfInput: return "end-of-input";
    }
    return "?";
}

namespace {

const std::unordered_set<std::string>& keyword_set() {
    static const std::unordered_set<std::string> kws = {
        // structure
        "thing", "fragment", "includes", "provided", "required", "port",
        "receives", "sends", "message", "property", "data_analytics",
        "statechart", "init", "state", "final", "on", "entry", "exit",
        "transition", "event", "action", "do", "end", "configuration",
        "instance", "connector",
        // actions
        "print", "if", "else", "da_preprocess", "da_train", "da_predict",
        "da_save",
        // data analytics parameters
        "labels", "features", "prediction_results", "dataset", "automl",
        "sequential", "timestamps", "preprocess_feature_scaler",
        "model_algorithm", "training_results", "blackbox_ml",
        "blackbox_ml_model", "blackbox_import_algorithm",
        // switches and literals
        "ON", "OFF", "TRUE", "FALSE", "true", "false",
        // types
        "Int32", "Long", "Float", "Double", "Boolean", "String",
        // logical operators
        "and", "or", "not",
    };
    return kws;
}

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return c >= '0' && c <= '9'; }

class Lexer {
public:
    Lexer(std::string_view src, std::string path) : src_(src), path_(std::move(path)) {}

    LexResult run() {
        LexResult out;
        for (;;) {
            std::string trivia = consume_trivia(out.diagnostics);
            if (pos_ >= src_.size()) {
                Token eof;
                eof.kind = TokenKind::EndOfInput;
                eof.trivia = std::move(trivia);
                eof.span = here(0);
                out.tokens.push_back(std::move(eof));
                break;
            }
            Token tok = next_token(out.diagnostics);
            tok.trivia = std::move(trivia);
            out.tokens.push_back(std::move(tok));
        }
        return out;
    }

private:
    std::string_view src_;
    std::string path_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;

    Span here(std::size_t len) const {
        Span s;
        s.line = line_;
        s.column = col_;
        s.offset = pos_;
        s.length = len;
        return s;
    }

    char peek(std::size_t ahead = 0) const {
        return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
    }

    void advance(std::size_t n = 1) {
        for (std::size_t i = 0; i < n && pos_ < src_.size(); ++i) {
            if (src_[pos_] == '\n') {
                ++line_;
                col_ = 1;
            } else {
                ++col_;
            }
            ++pos_;
        }
    }

    std::string consume_trivia(std::vector<Diagnostic>& diags) {
        std::size_t start = pos_;
        for (;;) {
            char c = peek();
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else if (c == '/' && peek(1) == '*') {
                Span open = here(2);
                advance(2);
                bool closed = false;
                while (pos_ < src_.size()) {
                    if (peek() == '*' && peek(1) == '/') {
                        advance(2);
                        closed = true;
                        break;
                    }
                    advance();
                }
                if (!closed) {
                    diags.push_back({"P004", Severity::Error, open,
                                     "unterminated comment", path_});
                }
            } else {
                break;
            }
        }
        return std::string(src_.substr(start, pos_ - start));
    }

    Token make(TokenKind kind, std::size_t len) {
        Token t;
        t.kind = kind;
        t.span = here(len);
        t.lexeme = std::string(src_.substr(pos_, len));
        advance(len);
        return t;
    }

    Token next_token(std::vector<Diagnostic>& diags) {
        char c = peek();
        if (ident_start(c)) {
            std::size_t len = 1;
            while (ident_char(peek(len))) ++len;
            std::string word(src_.substr(pos_, len));
            return make(is_keyword(word) ? TokenKind::Keyword : TokenKind::Identifier, len);
        }
        if (digit(c)) return lex_number();
        if (c == '"') return lex_string(diags);
        if (c == '@' && ident_start(peek(1))) {
            std::size_t len = 2;
            while (ident_char(peek(len))) ++len;
            return make(TokenKind::AnnotationMarker, len);
        }
        // multi-character punctuation first
        static const std::array<const char*, 6> two = {"->", "=>", "==", "!=", "<=", ">="};
        for (const char* p : two) {
            if (c == p[0] && peek(1) == p[1]) return make(TokenKind::Punctuation, 2);
        }
        return make(TokenKind::Punctuation, 1);
    }

    Token lex_number() {
        std::size_t len = 0;
        while (digit(peek(len))) ++len;
        bool is_float = false;
        if (peek(len) == '.' && digit(peek(len + 1))) {
            is_float = true;
            ++len;
            while (digit(peek(len))) ++len;
        }
        if (peek(len) == 'e' || peek(len) == 'E') {
            std::size_t e = len + 1;
            if (peek(e) == '+' || peek(e) == '-') ++e;
            if (digit(peek(e))) {
                is_float = true;
                ++e;
                while (digit(peek(e))) ++e;
                len = e;
            }
        }
        return make(is_float ? TokenKind::FloatLiteral : TokenKind::IntLiteral, len);
    }

    Token lex_string(std::vector<Diagnostic>& diags) {
        Span open = here(1);
        std::size_t len = 1; // opening quote
        for (;;) {
            char c = peek(len);
            if (c == '\0' && pos_ + len >= src_.size()) {
                diags.push_back({"P005", Severity::Error, open,
                                 "unterminated string literal", path_});
                break;
            }
            if (c == '\n') {
                diags.push_back({"P005", Severity::Error, open,
                                 "unterminated string literal", path_});
                break;
            }
            if (c == '\\') {
                len += 2;
                continue;
            }
            ++len;
            if (c == '"') break;
        }
        return make(TokenKind::StringLiteral, len);
    }
};

} // namespace

bool is_keyword(const std::string& word) { return keyword_set().count(word) != 0; }

LexResult tokenize(std::string_view source, const std::string& path) {
    return Lexer(source, path).run();
}

} // namespace mlq
