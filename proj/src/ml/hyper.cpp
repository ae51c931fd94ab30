#include "mlq/ml/hyper.hpp"

#include <cstdlib>
#include <set>

namespace mlq::ml {

namespace {

bool parse_ll(const std::string& s, long long& out) {
    char* end = nullptr;
    out = std::strtoll(s.c_str(), &end, 10);
    return end && *end == '\0' && !s.empty();
}

bool parse_int(const std::string& s, int& out) {
    long long v;
    if (!parse_ll(s, v)) return false;
    out = static_cast<int>(v);
    return true;
}

bool parse_double(const std::string& s, double& out) {
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end && *end == '\0' && !s.empty();
}

std::string canonical_loss(const std::string& v) {
    if (v == "squared_error" || v == "SquaredError" || v == "MeanSquaredError") {
        return "squared_error";
    }
    if (v == "sparse_categorical_crossentropy" || v == "SparseCategoricalCrossentropy") {
        return "sparse_categorical_crossentropy";
    }
    return "";
}

} // namespace

Hyperparams resolve_hyperparams(const DataAnalyticsSpec& spec, std::vector<Diagnostic>* diags,
                                const std::string& path) {
    Hyperparams hp;

    MlFamily fam = spec.family.value_or(MlFamily::LinearRegression);
    switch (fam) {
    case MlFamily::LogisticRegression:
        hp.learning_rate = 0.1;
        hp.epochs = 200;
        break;
    case MlFamily::MultilayerPerceptron:
        hp.learning_rate = 0.01;
        hp.epochs = 200;
        hp.loss = spec.task() == MlTask::Regression ? "squared_error"
                                                    : "sparse_categorical_crossentropy";
        break;
    default: break;
    }

    std::set<std::string> legal = {"seed", "error_threshold"};
    switch (fam) {
    case MlFamily::LinearRegression:
    case MlFamily::GaussianNaiveBayes: break;
    case MlFamily::LogisticRegression:
        legal.insert({"learning_rate", "epochs"});
        break;
    case MlFamily::DecisionTreeClassifier:
        legal.insert("max_depth");
        break;
    case MlFamily::MultilayerPerceptron:
        legal.insert({"hidden_size", "activation", "optimizer", "loss", "learning_rate",
                      "epochs", "batch_size"});
        break;
    case MlFamily::KMeans:
        legal.insert("k");
        break;
    }

    auto bad = [&](const ast::HyperParam& p, const std::string& msg) {
        if (diags)
            diags->push_back({"C3", Severity::Error, p.span, msg, path});
    };

    for (const auto& p : spec.hyperparams) {
        if (!legal.count(p.key)) {
            bad(p, "hyperparameter '" + p.key + "' is not valid for " +
                       std::string(family_name(fam)));
            continue;
        }
        if (p.key == "seed") {
            if (!parse_ll(p.value, hp.seed)) bad(p, "seed must be an integer");
        } else if (p.key == "error_threshold") {
            double eps = 0.0;
            if (!parse_double(p.value, eps) || eps < 0)
                bad(p, "error_threshold must be a non-negative number");
            else
                hp.error_threshold = eps;
        } else if (p.key == "learning_rate") {
            if (!parse_double(p.value, hp.learning_rate) || hp.learning_rate <= 0)
                bad(p, "learning_rate must be a positive number");
        } else if (p.key == "epochs") {
            if (!parse_int(p.value, hp.epochs) || hp.epochs <= 0)
                bad(p, "epochs must be a positive integer");
        } else if (p.key == "batch_size") {
            if (!parse_int(p.value, hp.batch_size) || hp.batch_size <= 0)
                bad(p, "batch_size must be a positive integer");
        } else if (p.key == "hidden_size") {
            if (!parse_int(p.value, hp.hidden_size) || hp.hidden_size <= 0)
                bad(p, "hidden_size must be a positive integer");
        } else if (p.key == "activation") {
            if (p.value == "relu" || p.value == "sigmoid")
                hp.activation = p.value;
            else
                bad(p, "activation must be relu or sigmoid");
        } else if (p.key == "optimizer") {
            if (p.value == "sgd") {
                hp.optimizer = "sgd";
            } else if (p.value == "adam") {
                // accepted spelling; the built-in engine trains with plain SGD
                hp.optimizer = "sgd";
                hp.notes.push_back("optimizer adam is executed as sgd by the built-in engine");
            } else {
                bad(p, "optimizer must be sgd or adam");
            }
        } else if (p.key == "loss") {
            std::string canon = canonical_loss(p.value);
            if (canon.empty()) {
                bad(p, "loss must be squared_error or sparse_categorical_crossentropy");
            } else {
                hp.loss = canon;
                bool regression = spec.task() == MlTask::Regression;
                if (regression && canon != "squared_error")
                    bad(p, "loss " + p.value + " requires a categorical label");
                if (!regression && canon != "sparse_categorical_crossentropy")
                    bad(p, "loss " + p.value + " requires a numeric label");
            }
        } else if (p.key == "k") {
            if (!parse_int(p.value, hp.k) || hp.k < 1) bad(p, "k must be a positive integer");
        } else if (p.key == "max_depth") {
            if (!parse_int(p.value, hp.max_depth) || hp.max_depth < 1)
                bad(p, "max_depth must be a positive integer");
        }
    }
    return hp;
}

} // namespace mlq::ml
