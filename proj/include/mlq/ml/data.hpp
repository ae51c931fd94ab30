#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlq/da_spec.hpp"
#include "mlq/ml/hyper.hpp"

namespace mlq::ml {

// Data/model failures reported to callers (the simulator converts them into
// error trace events; the CLI prints them and exits non-zero).
struct MlError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// --- timestamps --------------------------------------------------------------

struct Timestamp {
    int day = 1, month = 1, year = 2024, hour = 0, minute = 0, second = 0;
};

// Strict `dd-mm-yyyy HH:MM:SS` with field-range validation.
bool parse_timestamp(const std::string& text, Timestamp* out = nullptr);
std::string render_timestamp(const Timestamp& t);

// Logical-clock timestamp: a fixed epoch advanced 8 seconds per step, so rows
// appended during a run are reproducible byte-for-byte.
Timestamp timestamp_at_step(std::uint64_t step);

// --- datasets ----------------------------------------------------------------

// A loaded, numerically encoded dataset. Every kept row has exactly one
// encoded double per feature column; String columns carry a sorted-unique
// dictionary (cell value = dictionary index).
struct Dataset {
    std::vector<std::vector<double>> rows;
    std::vector<std::string> timestamps; // raw strings; empty unless timestamps ON
    std::vector<std::vector<std::string>> dictionaries; // per column; empty for non-String
    std::size_t dropped_rows = 0; // rows excluded by the NaN missing-value marker
};

// Headerless CSV, `,` separator, `.` decimal point; leading timestamp column
// when `timestamps` is set. Throws MlError on unreadable/empty files, field
// count mismatches, bad timestamps, and non-numeric cells.
Dataset load_dataset(const std::string& path, const std::vector<DaFeature>& features,
                     bool timestamps);

// Encodes one string cell by a column dictionary; unseen values get a fresh
// code one past the end.
double encode_with_dictionary(const std::vector<std::string>& dict, const std::string& value);

// --- train/test split ----------------------------------------------------------

struct Split {
    std::vector<std::size_t> train, test;
};

// Ordered head/tail split at floor(n * (1 - test_share)); non-sequential data
// is shuffled with the given seed first.
Split split_rows(std::size_t n, double test_share, bool sequential, long long seed);

// --- feature scaling -----------------------------------------------------------

struct ScalerParams {
    ScalerKind kind = ScalerKind::None;
    std::vector<double> center, scale; // per input column; scale 0 → passthrough
    std::vector<std::string> notes;    // zero-variance / zero-range columns
};

ScalerParams fit_scaler(ScalerKind kind, const std::vector<std::vector<double>>& rows,
                        const std::vector<std::size_t>& fit_rows,
                        const std::vector<std::size_t>& cols,
                        const std::vector<std::string>& col_names);

// Scales an input vector (already projected to the scaler's columns) in place.
void apply_scaler(const ScalerParams& s, std::vector<double>& x);

// --- the preprocessing pipeline --------------------------------------------------

// Everything train/predict need: encoded data, split, fitted scaler, and the
// scaled train/test matrices. The scaler is fitted on the train split only.
struct PreparedData {
    Dataset data;
    Split split;
    std::vector<std::size_t> input_cols;
    std::optional<std::size_t> label_col;
    ScalerParams scaler;
    std::vector<std::string> notes;

    std::vector<std::vector<double>> x_train, x_test;
    std::vector<double> y_train, y_test;
};

PreparedData preprocess(const DataAnalyticsSpec& spec, const Hyperparams& hp,
                        const std::string& dataset_path, double test_share = 0.2);

} // namespace mlq::ml
