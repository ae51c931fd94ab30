#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace mlq {

// Half-open byte range into one source file, plus the 1-based line/column
// of its first byte.
struct Span {
    int line = 1;
    int column = 1;
    std::size_t offset = 0;
    std::size_t length = 0;
};

enum class Severity { Error, Warning, Note };

struct Diagnostic {
    std::string code;     // "P001", "R003", "V2", "C4", "W001", "N001", ...
    Severity severity = Severity::Error;
    Span span;
    std::string message;
    std::string path;     // source file, may be empty for in-memory input
};

const char* severity_name(Severity s);

// "path:line:col: severity: [CODE] message"
std::string render_diagnostic(const Diagnostic& d);

bool has_errors(const std::vector<Diagnostic>& diags);

// Stable ordering: by byte offset, then code, then message.
void sort_diagnostics(std::vector<Diagnostic>& diags);

} // namespace mlq
