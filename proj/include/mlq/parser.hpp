#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "mlq/ast.hpp"
#include "mlq/diag.hpp"

namespace mlq {

struct ParseResult {
    ast::ModelUnit model; // partial on error
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return !has_errors(diagnostics); }
};

// Parses a whole model file. Never throws; syntax problems are reported as
// diagnostics and the parser resumes at the next top-level declaration.
ParseResult parse_model(std::string_view source, const std::string& path = "");

} // namespace mlq
