#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mlq/da_spec.hpp"
#include "mlq/ml/data.hpp"

namespace mlq::ml {

// --- per-family parameter blocks ----------------------------------------------

struct LinearModel {
    std::vector<double> w;
    double b = 0.0;
};

// binary classifier; sigmoid(w·x + b) = P(classes[1])
struct LogisticModel {
    std::vector<double> w;
    double b = 0.0;
};

struct GnbModel {
    std::vector<double> prior;              // per class, classes order
    std::vector<std::vector<double>> mean;  // class × feature
    std::vector<std::vector<double>> var;   // class × feature (floored)
};

struct TreeModel {
    // leaf iff feature < 0; leaves carry the class code in `value`
    struct Node {
        int feature = -1;
        double threshold = 0.0;
        int left = -1, right = -1; // x[feature] <= threshold goes left
        double value = 0.0;
    };
    std::vector<Node> nodes; // node 0 is the root
};

struct MlpModel {
    std::size_t in = 0, hidden = 0, out = 0;
    std::string activation = "relu"; // relu | sigmoid
    std::vector<double> w1, b1;      // w1: hidden × in, row-major
    std::vector<double> w2, b2;      // w2: out × hidden, row-major
};

struct KMeansModel {
    std::size_t k = 0, dim = 0;
    std::vector<double> centroids; // k × dim, row-major
};

using FamilyParams =
    std::variant<LinearModel, LogisticModel, GnbModel, TreeModel, MlpModel, KMeansModel>;

// --- the trained model -----------------------------------------------------------

struct SchemaColumn {
    std::string name, type;
};

// Immutable after training; carries everything scoring needs (schema, scaler,
// dictionaries, class codes) so a deserialized or black-box model behaves
// exactly like a natively trained one.
struct TrainedModel {
    MlFamily family = MlFamily::LinearRegression;
    MlTask task = MlTask::Regression;

    std::vector<SchemaColumn> inputs;
    std::string label_name, label_type; // empty for clustering

    std::vector<double> classes;                              // ascending class codes
    std::vector<std::vector<std::string>> input_dictionaries; // per input column
    std::vector<std::string> label_dictionary;                // String-label decoding

    ScalerParams scaler;
    long long seed = 10;
    std::uint64_t trained_at_step = 0;
    std::vector<std::pair<std::string, std::string>> hyper_echo;

    FamilyParams params;
};

// Scores one input vector that is encoded but NOT yet scaled; the model applies
// its own scaler. Returns a class code, numeric value, or cluster id.
double predict_encoded(const TrainedModel& m, std::vector<double> x);

// Scores a vector already scaled with the model's scaler (e.g. a prepared
// test-split row).
double predict_scaled(const TrainedModel& m, const std::vector<double>& x);

// --- evaluation -------------------------------------------------------------------

struct Metrics {
    MlTask task = MlTask::Classification;
    std::size_t count = 0;

    // classification
    double accuracy = 0, precision = 0, recall = 0, f1 = 0;
    long long tp = 0, tn = 0, fp = 0, fn = 0;
    bool binary = false;
    bool precision_zero_div = false, recall_zero_div = false, f1_zero_div = false;

    // regression
    double mae = 0, mse = 0;

    // clustering
    double purity = 0;
};

Metrics evaluate_classification(const std::vector<double>& truth,
                                const std::vector<double>& predicted);
Metrics evaluate_regression(const std::vector<double>& truth,
                            const std::vector<double>& predicted);
// `truth` = label codes, `predicted` = cluster ids; best one-to-one matching
// (exhaustive for up to 8 clusters), majority matching beyond that.
Metrics evaluate_clustering(const std::vector<double>& truth,
                            const std::vector<double>& predicted);

// key=value rendering for reports and the training log
std::string metrics_summary(const Metrics& m);

} // namespace mlq::ml
