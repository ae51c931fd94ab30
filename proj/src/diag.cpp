#include "mlq/diag.hpp"

#include <algorithm>
#include <tuple>

namespace mlq {

const char* severity_name(Severity s) {
    switch (s) {
    case Severity::Error: return "error";
    case Severity::Warning: return "warning";
    case Severity::Note: return "note";
    }
    return "error";
}

std::string render_diagnostic(const Diagnostic& d) {
    std::string out;
    out += d.path.empty() ? "<input>" : d.path;
    out += ':';
    out += std::to_string(d.span.line);
    out += ':';
    out += std::to_string(d.span.column);
    out += ": ";
    out += severity_name(d.severity);
    out += ": [";
    out += d.code;
    out += "] ";
    out += d.message;
    return out;
}

bool has_errors(const std::vector<Diagnostic>& diags) {
    for (const auto& d : diags)
        if (d.severity == Severity::Error) return true;
    return false;
}

void sort_diagnostics(std::vector<Diagnostic>& diags) {
    std::stable_sort(diags.begin(), diags.end(), [](const Diagnostic& a, const Diagnostic& b) {
        return std::tie(a.span.offset, a.code, a.message) < std::tie(b.span.offset, b.code, b.message);
    });
}

} // namespace mlq
