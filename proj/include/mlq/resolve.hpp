#pragma once

#include <vector>

#include "mlq/ast.hpp"
#include "mlq/diag.hpp"
#include "mlq/resolved.hpp"

namespace mlq {

struct ResolveResult {
    ResolvedModel model; // partial when diagnostics contain errors
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return !has_errors(diagnostics); }
};

// Flattens fragment includes, binds every name, and produces the resolved
// model the later passes work from.
ResolveResult resolve(const ast::ModelUnit& unit);

// Rebuilds concrete syntax from a resolved model (fragments gone, includes
// flattened). Resolving the emitted text again is an identity.
std::string emit_resolved(const ResolvedModel& model);

} // namespace mlq
