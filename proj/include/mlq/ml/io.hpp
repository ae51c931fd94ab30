#pragma once

#include <string>

#include "mlq/ml/model.hpp"
#include "mlq/ml/train.hpp"

namespace mlq::ml {

// Versioned line-oriented model document (magic header MLQM/1). Numbers are
// rendered shortest-round-trip, so deserialize(serialize(m)) reproduces every
// parameter bit-for-bit.
std::string serialize_model(const TrainedModel& m);
TrainedModel deserialize_model(const std::string& text);

// Convenience file wrappers (throw MlError on I/O failure).
void write_model_file(const std::string& path, const TrainedModel& m);
TrainedModel read_model_file(const std::string& path);

// Loads the model document `model.mlqm` from a black-box directory and checks
// it against the DA component: declared import family and Φ schema must match.
TrainedModel load_blackbox(const DataAnalyticsSpec& spec, const std::string& model_dir);

// One appended line per training: ISO wall-clock time, family, hyperparameters,
// held-out metrics.
std::string training_log_line(const std::string& iso_time, const TrainedModel& m,
                              const TrainingReport& rep);
void append_training_log(const std::string& path, const std::string& line);
std::string iso_utc_now();

} // namespace mlq::ml
