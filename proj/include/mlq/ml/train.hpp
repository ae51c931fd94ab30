#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mlq/ml/model.hpp"

namespace mlq::ml {

// What one training run produced, beyond the model itself. The wall-clock
// line for the training log is rendered separately (see io.hpp) so the
// report stays deterministic.
struct TrainingReport {
    std::string family;
    long long seed = 10;
    std::size_t train_rows = 0, test_rows = 0, dropped_rows = 0;

    bool has_held_out = false;
    Metrics held_out;

    // per-epoch loss (logistic / MLP) or per-iteration inertia (k-means)
    std::vector<double> curve;
    std::size_t iterations = 0;   // k-means Lloyd iterations
    double final_inertia = 0.0;   // k-means

    std::optional<double> error_threshold; // generalization gate, if configured
    double threshold_error = 0.0;          // MAE / (1 - accuracy)
    bool threshold_passed = true;

    std::vector<std::string> notes;
};

// Trains the family named by the spec on the prepared split. Throws MlError on
// under-sized or degenerate data (see the per-family minimum-row rules).
TrainedModel train(const DataAnalyticsSpec& spec, const Hyperparams& hp, const PreparedData& pd,
                   std::uint64_t step = 0, TrainingReport* report = nullptr);

// --- differentiable cores, exposed for finite-difference verification -------------

// theta = [w..., b]; y01 in {0,1}; returns mean log-loss
double logistic_loss(const std::vector<std::vector<double>>& X, const std::vector<double>& y01,
                     const std::vector<double>& theta);
std::vector<double> logistic_grad(const std::vector<std::vector<double>>& X,
                                  const std::vector<double>& y01,
                                  const std::vector<double>& theta);

struct MlpShape {
    std::size_t in = 0, hidden = 0, out = 0;
    std::string activation = "relu";
    bool classification = false; // softmax + cross-entropy vs. squared error
};

inline std::size_t mlp_param_count(const MlpShape& s) {
    return s.hidden * s.in + s.hidden + s.out * s.hidden + s.out;
}

// theta = [w1 (hidden×in), b1, w2 (out×hidden), b2]; for classification y holds
// class indices 0..out-1, for regression the target values.
double mlp_loss(const MlpShape& s, const std::vector<double>& theta,
                const std::vector<std::vector<double>>& X, const std::vector<double>& y);
std::vector<double> mlp_grad(const MlpShape& s, const std::vector<double>& theta,
                             const std::vector<std::vector<double>>& X,
                             const std::vector<double>& y);

} // namespace mlq::ml
