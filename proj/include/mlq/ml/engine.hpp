#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mlq/da_spec.hpp"
#include "mlq/ml/hyper.hpp"
#include "mlq/ml/io.hpp"
#include "mlq/ml/model.hpp"
#include "mlq/ml/train.hpp"
#include "mlq/value.hpp"

namespace mlq::ml {

// Joins a base directory and a path from a model; absolute paths and an empty
// root pass through untouched. Purely lexical so artifacts stay relocatable.
std::string resolve_data_path(const std::string& root, const std::string& path);

// One DA component at run time: owns the prepared data and the trained (or
// black-box) model, and converts between typed runtime values and the encoded
// numeric space of the model. Throws MlError for every failure; the simulator
// converts those into error trace events.
class DaEngine {
public:
    DaEngine(const DataAnalyticsSpec& spec, std::string dataset_root, double test_share = 0.2,
             std::optional<std::uint64_t> default_seed = std::nullopt);

    const DataAnalyticsSpec& spec() const { return spec_; }
    bool preprocessed() const { return prepared_.has_value(); }
    bool has_model() const { return model_.has_value(); }
    const TrainedModel* model() const { return model_ ? &*model_ : nullptr; }
    const PreparedData* prepared() const { return prepared_ ? &*prepared_ : nullptr; }
    const TrainingReport* last_report() const { return report_ ? &*report_ : nullptr; }

    std::string dataset_path() const;
    // The trained model document lands next to the dataset, named after the
    // declared model instance.
    std::string model_document_path() const;

    // da_preprocess: load + encode + split + fit the scaler
    void preprocess();

    // da_train: fit, persist the model document, append the training log line
    const TrainingReport& train_now(std::uint64_t step);

    // da_predict: args are the input-feature values in feature order
    Value predict(const std::vector<Value>& args);

    // da_save: appends one dataset row from the current feature-property
    // values (timestamp first when the component keeps timestamps); returns
    // the appended line
    std::string save_row(const std::vector<Value>& feature_values, std::uint64_t step);

    // black-box components load their document eagerly at instantiation
    void load_blackbox_model();

private:
    DataAnalyticsSpec spec_;
    std::string root_;
    double test_share_;
    Hyperparams hp_;
    std::optional<PreparedData> prepared_;
    std::optional<TrainedModel> model_;
    std::optional<TrainingReport> report_;
};

} // namespace mlq::ml
