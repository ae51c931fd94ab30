#pragma once

#include <vector>

#include "mlq/diag.hpp"
#include "mlq/resolved.hpp"

namespace mlq {

struct ValidateOptions {
    // compile/run targets need a configuration; library callers validating a
    // bare thing collection may turn this off
    bool require_configuration = true;
};

// Validity: type correctness and structural soundness (codes V1..V6, plus
// warning W001). Empty-of-errors means is_valid.
std::vector<Diagnostic> check_valid(const ResolvedModel& model);

// Completeness: everything needed to build and run the system is present
// (codes C1..C6). Empty means is_complete.
std::vector<Diagnostic> check_complete(const ResolvedModel& model,
                                       const ValidateOptions& opts = {});

// Fills automl-mode defaults (sequential, scaler, engine) into DA specs that
// left them open. Returns one note (N001) per field changed; idempotent.
std::vector<Diagnostic> apply_automl_defaults(ResolvedModel& model);

} // namespace mlq
