#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mlq/da_spec.hpp"
#include "mlq/diag.hpp"

namespace mlq::ml {

// Per-family hyperparameters with their defaults filled in. Only the fields
// meaningful for the family are consulted.
struct Hyperparams {
    long long seed = 10;
    double learning_rate = 0.0;
    int epochs = 200;
    int batch_size = 32;
    int hidden_size = 100;
    std::string activation = "relu";
    std::string optimizer = "sgd";
    std::string loss; // squared_error | sparse_categorical_crossentropy
    int k = 2;
    int max_depth = 10;
    // Optional held-out error gate; the training report marks pass/fail
    // against it but training itself never aborts.
    std::optional<double> error_threshold;
    std::vector<std::string> notes; // e.g. optimizer substitutions
};

// Parses spec.hyperparams against the family's legal keys, fills defaults,
// and appends C3 diagnostics for unknown keys or malformed values.
Hyperparams resolve_hyperparams(const DataAnalyticsSpec& spec,
                                std::vector<Diagnostic>* diags = nullptr,
                                const std::string& path = "");

} // namespace mlq::ml
