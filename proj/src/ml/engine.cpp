#include "mlq/ml/engine.hpp"

#include <cmath>
#include <fstream>

namespace mlq::ml {

std::string resolve_data_path(const std::string& root, const std::string& path) {
    if (root.empty() || path.empty() || path.front() == '/') return path;
    std::string joined = root;
    if (joined.back() != '/') joined += '/';
    return joined + path;
}

DaEngine::DaEngine(const DataAnalyticsSpec& spec, std::string dataset_root, double test_share,
                   std::optional<std::uint64_t> default_seed)
    : spec_(spec), root_(std::move(dataset_root)), test_share_(test_share),
      hp_(resolve_hyperparams(spec)) {
    if (default_seed) {
        // The run-level seed stands in for the hyperparameter default; a seed
        // the component pins itself always wins.
        bool pinned = false;
        for (const auto& p : spec_.hyperparams) pinned = pinned || p.key == "seed";
        if (!pinned) hp_.seed = *default_seed;
    }
}

std::string DaEngine::dataset_path() const { return resolve_data_path(root_, spec_.dataset); }

std::string DaEngine::model_document_path() const {
    std::string dir;
    std::string ds = dataset_path();
    std::size_t slash = ds.rfind('/');
    if (slash != std::string::npos) dir = ds.substr(0, slash + 1);
    std::string stem = spec_.model_instance.empty() ? spec_.name + "_model" : spec_.model_instance;
    return dir + stem + ".mlqm";
}

void DaEngine::preprocess() {
    prepared_ = ml::preprocess(spec_, hp_, dataset_path(), test_share_);
}

const TrainingReport& DaEngine::train_now(std::uint64_t step) {
    if (spec_.blackbox)
        throw MlError("da_train is not allowed on black-box component " + spec_.name);
    if (!prepared_)
        throw MlError("da_train before da_preprocess in " + spec_.name);
    TrainingReport rep;
    model_ = train(spec_, hp_, *prepared_, step, &rep);
    report_ = std::move(rep);
    write_model_file(model_document_path(), *model_);
    if (!spec_.training_results.empty())
        append_training_log(resolve_data_path(root_, spec_.training_results),
                            training_log_line(iso_utc_now(), *model_, *report_));
    return *report_;
}

namespace {

double encode_arg(const TrainedModel& m, std::size_t col, const Value& v) {
    if (v.is_string()) return encode_with_dictionary(m.input_dictionaries[col], v.as_string());
    if (v.is_bool()) return v.as_bool() ? 1.0 : 0.0;
    return v.as_double();
}

} // namespace

Value DaEngine::predict(const std::vector<Value>& args) {
    if (!model_)
        throw MlError("da_predict before da_train in " + spec_.name);
    const TrainedModel& m = *model_;
    if (args.size() != m.inputs.size())
        throw MlError("da_predict arity mismatch in " + spec_.name + ": expected " +
                      std::to_string(m.inputs.size()) + " arguments, got " +
                      std::to_string(args.size()));
    std::vector<double> x(args.size());
    for (std::size_t i = 0; i < args.size(); ++i) x[i] = encode_arg(m, i, args[i]);
    double code = predict_encoded(m, x);

    ValueType t = spec_.prediction_type;
    switch (m.task) {
    case MlTask::Regression:
        if (t == ValueType::Float || t == ValueType::Double) return Value::of_double(code, t);
        return Value::of_int(std::llround(code), t);
    case MlTask::Classification: {
        if (t == ValueType::Boolean) return Value::of_bool(code != 0.0);
        if (t == ValueType::String) {
            auto ix = static_cast<std::size_t>(std::llround(code));
            if (ix >= m.label_dictionary.size())
                throw MlError("prediction decodes outside the label dictionary of " + spec_.name);
            return Value::of_string(m.label_dictionary[ix]);
        }
        return Value::of_int(std::llround(code), t);
    }
    case MlTask::Clustering: {
        long long id = std::llround(code);
        if (t == ValueType::Boolean) return Value::of_bool(id == 1);
        if (t == ValueType::String) return Value::of_string(render_int(id));
        return Value::of_int(id, t);
    }
    }
    return Value::of_bool(false);
}

std::string DaEngine::save_row(const std::vector<Value>& feature_values, std::uint64_t step) {
    if (feature_values.size() != spec_.features.size())
        throw MlError("da_save expects one value per feature in " + spec_.name);
    std::string line;
    if (spec_.timestamps) line += render_timestamp(timestamp_at_step(step));
    for (std::size_t i = 0; i < feature_values.size(); ++i) {
        std::string cell = feature_values[i].render();
        if (cell.find(',') != std::string::npos || cell.find('\n') != std::string::npos)
            throw MlError("da_save value for " + spec_.features[i].name +
                          " contains a CSV separator");
        if (spec_.timestamps || i > 0) line += ',';
        line += cell;
    }
    std::string path = dataset_path();
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw MlError("cannot append to dataset '" + path + "'");
    out << line << '\n';
    return line;
}

void DaEngine::load_blackbox_model() {
    model_ = load_blackbox(spec_, resolve_data_path(root_, spec_.blackbox_model_path));
}

} // namespace mlq::ml
