#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>

#include "mlq/ml/engine.hpp"
#include "mlq/ml/synth.hpp"
#include "mlq/rng.hpp"
#include "support/scratch.hpp"

using namespace mlq;
using namespace mlq::ml;
using testsupport::scratch_dir;
using testsupport::slurp;
using testsupport::spit;

namespace {

DataAnalyticsSpec smart_spec() {
    DataAnalyticsSpec spec;
    spec.name = "da1";
    spec.thing = "Server";
    spec.labels = true;
    spec.features = {{"client_ip_address", ValueType::String},
                     {"client_code", ValueType::Int32},
                     {"prediction", ValueType::Boolean}};
    spec.prediction_results = "prediction";
    spec.prediction_type = ValueType::Boolean;
    spec.sequential = true;
    spec.family = MlFamily::DecisionTreeClassifier;
    spec.model_instance = "gatekeeper";
    spec.training_results = "training.txt";
    return spec;
}

// deterministic ip/code/label rows following the gating rule code > 500
std::string ip_dataset(std::size_t rows, std::uint64_t seed) {
    Rng rng(seed);
    std::string csv;
    for (std::size_t i = 0; i < rows; ++i) {
        long long code = static_cast<long long>(rng.index(1000));
        csv += "10.0." + std::to_string(rng.index(4)) + "." + std::to_string(rng.index(250));
        csv += "," + render_int(code);
        csv += code > 500 ? ",true" : ",false";
        csv += "\n";
    }
    return csv;
}

TrainedModel train_family(const char* dir_name, DataAnalyticsSpec spec, const std::string& csv,
                          Hyperparams hp) {
    auto dir = scratch_dir(dir_name);
    spit(dir / "d.csv", csv);
    PreparedData pd = preprocess(spec, hp, (dir / "d.csv").string());
    return train(spec, hp, pd);
}

} // namespace

TEST_CASE("model documents round-trip bit-exactly for every family") {
    std::vector<TrainedModel> models;

    {
        auto spec = smart_spec();
        Hyperparams hp;
        models.push_back(train_family("io_tree", spec, ip_dataset(120, 10), hp));
    }
    {
        DataAnalyticsSpec spec;
        spec.name = "da1";
        spec.labels = true;
        spec.features = {{"x", ValueType::Double}, {"y", ValueType::Double}};
        spec.sequential = true;
        spec.family = MlFamily::LinearRegression;
        models.push_back(train_family("io_linear", spec, gen_synthetic("line", 10, 50),
                                      Hyperparams{}));
    }
    {
        DataAnalyticsSpec spec;
        spec.name = "da1";
        spec.labels = true;
        spec.features = {{"x", ValueType::Double},
                         {"y", ValueType::Double},
                         {"label", ValueType::Boolean}};
        spec.sequential = true;
        spec.scaler = ScalerKind::Standard;
        Hyperparams hp;
        hp.learning_rate = 0.1;
        spec.family = MlFamily::LogisticRegression;
        models.push_back(
            train_family("io_logistic", spec, gen_synthetic("separable-2d", 10, 80), hp));
        spec.family = MlFamily::GaussianNaiveBayes;
        models.push_back(
            train_family("io_gnb", spec, gen_synthetic("separable-2d", 10, 80), Hyperparams{}));
        spec.family = MlFamily::MultilayerPerceptron;
        Hyperparams mh;
        mh.hidden_size = 3;
        mh.epochs = 5;
        mh.learning_rate = 0.05;
        mh.loss = "sparse_categorical_crossentropy";
        models.push_back(
            train_family("io_mlp", spec, gen_synthetic("separable-2d", 10, 80), mh));
    }
    {
        DataAnalyticsSpec spec;
        spec.name = "da1";
        spec.labels = false;
        spec.features = {{"x", ValueType::Double}, {"y", ValueType::Double}};
        spec.sequential = true;
        spec.family = MlFamily::KMeans;
        // drop the label column of separable-2d by regenerating two columns
        Rng rng(4);
        std::string csv;
        for (int i = 0; i < 60; ++i) {
            double cx = rng.index(2) ? 3.0 : -3.0;
            csv += render_double(cx + rng.range(-1, 1)) + "," +
                   render_double(cx + rng.range(-1, 1)) + "\n";
        }
        models.push_back(train_family("io_kmeans", spec, csv, Hyperparams{}));
    }

    Rng rng(99);
    for (const auto& m : models) {
        std::string doc = serialize_model(m);
        CHECK(doc.substr(0, 7) == "MLQM/1\n");
        TrainedModel back = deserialize_model(doc);
        // bit-exact: re-serialization reproduces the document byte for byte
        CHECK(serialize_model(back) == doc);
        // and the round-tripped model scores identically
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> x(m.inputs.size());
            for (auto& v : x) v = rng.range(-500, 2500);
            CHECK(predict_encoded(m, x) == predict_encoded(back, x));
        }
    }
}

TEST_CASE("a serialized linear model carries one coefficient per input plus an intercept") {
    DataAnalyticsSpec spec;
    spec.name = "da1";
    spec.labels = true;
    spec.features = {{"a", ValueType::Double},
                     {"b", ValueType::Double},
                     {"c", ValueType::Double},
                     {"y", ValueType::Double}};
    spec.sequential = true;
    spec.family = MlFamily::LinearRegression;
    Rng rng(8);
    std::string csv;
    for (int i = 0; i < 40; ++i) {
        double a = rng.range(-1, 1), b = rng.range(-1, 1), c = rng.range(-1, 1);
        csv += render_double(a) + "," + render_double(b) + "," + render_double(c) + "," +
               render_double(a + 2 * b - c) + "\n";
    }
    TrainedModel m = train_family("io_linear_shape", spec, csv, Hyperparams{});
    const auto& lin = std::get<LinearModel>(m.params);
    CHECK(lin.w.size() == spec.features.size() - 1);
    std::string doc = serialize_model(m);
    CHECK(doc.find("params linear 3\n") != std::string::npos);
}

TEST_CASE("document version and family tags are closed sets") {
    CHECK_THROWS_WITH_AS(deserialize_model("MLQM/2\nfamily linear\n"),
                         doctest::Contains("expected 'MLQM/1'"), MlError);
    CHECK_THROWS_WITH_AS(
        deserialize_model("MLQM/1\nfamily random_forest\ntask classification\n"),
        doctest::Contains("unknown model family 'random_forest'"), MlError);
}

TEST_CASE("truncated documents are rejected as corrupted") {
    DataAnalyticsSpec spec;
    spec.name = "da1";
    spec.labels = true;
    spec.features = {{"x", ValueType::Double}, {"y", ValueType::Double}};
    spec.sequential = true;
    spec.family = MlFamily::LinearRegression;
    TrainedModel m = train_family("io_trunc", spec, gen_synthetic("line", 10, 30), Hyperparams{});
    std::string doc = serialize_model(m);
    std::string cut = doc.substr(0, doc.size() / 2);
    CHECK_THROWS_WITH_AS(deserialize_model(cut), doctest::Contains("corrupted model document"),
                         MlError);
}

TEST_CASE("determinism: identical spec, dataset, and seed give identical bytes") {
    auto spec = smart_spec();
    Hyperparams hp;
    std::string csv = ip_dataset(100, 10);
    TrainedModel a = train_family("io_det_a", spec, csv, hp);
    TrainedModel b = train_family("io_det_b", spec, csv, hp);
    CHECK(serialize_model(a) == serialize_model(b));
}

TEST_CASE("Boolean labels always decode to Boolean predictions") {
    auto spec = smart_spec();
    auto dir = scratch_dir("io_bool_decode");
    spit(dir / "d.csv", ip_dataset(150, 10));
    spec.dataset = "d.csv";
    DaEngine engine(spec, dir.string());
    engine.preprocess();
    engine.train_now(0);
    Rng rng(5);
    for (int i = 0; i < 40; ++i) {
        Value v = engine.predict({Value::of_string("10.0.0.1"),
                                  Value::of_int(static_cast<long long>(rng.index(1000)),
                                                ValueType::Int32)});
        CHECK(v.is_bool()); // type soundness of the label rule
    }
}

// --- the DA engine end to end -------------------------------------------------------

TEST_CASE("engine: preprocess, train, predict, and save against a real directory") {
    auto dir = scratch_dir("engine_flow");
    spit(dir / "data" / "ip.csv", ip_dataset(200, 10));
    auto spec = smart_spec();
    spec.dataset = "data/ip.csv";
    spec.training_results = "data/training.txt";

    DaEngine engine(spec, dir.string());
    CHECK(engine.dataset_path() == (dir / "data" / "ip.csv").string());
    CHECK(engine.model_document_path() == (dir / "data" / "gatekeeper.mlqm").string());

    CHECK_THROWS_WITH_AS(engine.train_now(1), doctest::Contains("da_train before da_preprocess"),
                         MlError);
    CHECK_THROWS_WITH_AS(engine.predict({}), doctest::Contains("da_predict before da_train"),
                         MlError);

    engine.preprocess();
    const TrainingReport& rep = engine.train_now(42);
    CHECK(rep.train_rows == 160);
    CHECK(rep.test_rows == 40);
    CHECK(rep.has_held_out);
    CHECK(rep.held_out.accuracy >= 0.95);

    // the model document landed next to the dataset and replays
    TrainedModel persisted = read_model_file((dir / "data" / "gatekeeper.mlqm").string());
    CHECK(persisted.trained_at_step == 42);
    CHECK(persisted.inputs.size() == 2);

    // the training log gained one line with family and metrics
    std::string log = slurp(dir / "data" / "training.txt");
    CHECK(log.find("family=decision_tree_classifier") != std::string::npos);
    CHECK(log.find("accuracy=") != std::string::npos);
    CHECK(log.find("max_depth=10") != std::string::npos);

    // predictions follow the gating rule on clean inputs
    Value hot = engine.predict(
        {Value::of_string("10.0.0.9"), Value::of_int(900, ValueType::Int32)});
    Value cold = engine.predict(
        {Value::of_string("10.0.0.9"), Value::of_int(10, ValueType::Int32)});
    CHECK(hot.as_bool());
    CHECK_FALSE(cold.as_bool());

    // da_save appends exactly one |Φ|-field row (timestamps OFF here)
    std::string before = slurp(dir / "data" / "ip.csv");
    engine.save_row({Value::of_string("10.0.0.9"), Value::of_int(900, ValueType::Int32),
                     Value::of_bool(true)},
                    50);
    std::string after = slurp(dir / "data" / "ip.csv");
    CHECK(after.substr(0, before.size()) == before); // append never truncates
    CHECK(after.substr(before.size()) == "10.0.0.9,900,true\n");
}

TEST_CASE("engine: timestamped saves prepend a parseable logical-clock stamp") {
    auto dir = scratch_dir("engine_ts");
    // timestamps ON: stamp column + x + label
    std::string csv;
    for (int i = 0; i < 12; ++i)
        csv += render_timestamp(timestamp_at_step(static_cast<std::uint64_t>(i))) + "," +
               render_int(i) + "," + (i % 2 ? "true" : "false") + "\n";
    spit(dir / "series.csv", csv);

    DataAnalyticsSpec spec;
    spec.name = "da1";
    spec.labels = true;
    spec.timestamps = true;
    spec.sequential = true;
    spec.features = {{"x", ValueType::Int32}, {"flag", ValueType::Boolean}};
    spec.prediction_results = "flag";
    spec.prediction_type = ValueType::Boolean;
    spec.dataset = "series.csv";
    spec.family = MlFamily::DecisionTreeClassifier;

    DaEngine engine(spec, dir.string());
    engine.preprocess();
    CHECK(engine.prepared()->x_train.size() == 9); // floor(12 · 0.8) = 9

    engine.save_row({Value::of_int(99, ValueType::Int32), Value::of_bool(true)}, 7);
    std::string after = slurp(dir / "series.csv");
    std::string last = after.substr(after.rfind("01-01-2024 00:00:56"));
    CHECK(last == "01-01-2024 00:00:56,99,true\n"); // 7 steps × 8 s
    // the appended row still loads: |Φ|+1 fields, stamp parses
    Dataset ds = load_dataset((dir / "series.csv").string(), spec.features, true);
    CHECK(ds.rows.size() == 13);
}

// --- black-box loading ----------------------------------------------------------------

namespace {

DataAnalyticsSpec cluster2_spec() {
    DataAnalyticsSpec spec;
    spec.name = "da1";
    spec.labels = false;
    const char* names[] = {"fridge", "freezer", "kettle",  "toaster", "oven",
                           "tv",     "router",  "charger", "washer",  "aggregate"};
    for (const char* n : names) spec.features.push_back({n, ValueType::Double});
    spec.prediction_results = "cluster";
    spec.prediction_type = ValueType::Boolean;
    spec.sequential = true;
    return spec;
}

} // namespace

TEST_CASE("black-box k-means behaves identically to the natively trained model") {
    auto dir = scratch_dir("blackbox_parity");
    std::string csv = gen_synthetic("smarthome-cluster", 10, 300);
    spit(dir / "loads.csv", csv);

    // native route: scenario-2-style spec trains its own model
    auto native_spec = cluster2_spec();
    native_spec.dataset = "loads.csv";
    native_spec.family = MlFamily::KMeans;
    native_spec.model_instance = "clusters";
    DaEngine native(native_spec, dir.string());
    native.preprocess();
    native.train_now(0);

    // out-of-band: the serialized document is dropped into a black-box dir
    std::filesystem::create_directories(dir / "bbx");
    std::filesystem::copy_file(dir / "clusters.mlqm", dir / "bbx" / "model.mlqm");

    auto bb_spec = cluster2_spec();
    bb_spec.dataset = "loads.csv";
    bb_spec.blackbox = true;
    bb_spec.blackbox_model_path = "bbx";
    bb_spec.blackbox_algorithm = "k_means";
    DaEngine blackbox(bb_spec, dir.string());
    blackbox.load_blackbox_model();
    CHECK(blackbox.has_model());

    // parity on 100 held-out rows (fresh draw from the same generator)
    std::string held = gen_synthetic("smarthome-cluster", 11, 100);
    auto held_dir = dir / "held.csv";
    spit(held_dir, held);
    Dataset ds = load_dataset(held_dir.string(), bb_spec.features, false);
    REQUIRE(ds.rows.size() == 100);
    for (const auto& row : ds.rows) {
        std::vector<Value> args;
        for (double v : row) args.push_back(Value::of_double(v));
        Value a = native.predict(args);
        Value b = blackbox.predict(args);
        CHECK(a.as_bool() == b.as_bool());
    }

    // training actions stay illegal on the black-box component
    CHECK_THROWS_WITH_AS(blackbox.train_now(0), doctest::Contains("not allowed on black-box"),
                         MlError);
}

TEST_CASE("black-box loading rejects family and schema mismatches") {
    auto dir = scratch_dir("blackbox_reject");
    // a trained linear model posing as the import
    DataAnalyticsSpec lin_spec;
    lin_spec.name = "da1";
    lin_spec.labels = true;
    lin_spec.features = {{"x", ValueType::Double}, {"y", ValueType::Double}};
    lin_spec.sequential = true;
    lin_spec.family = MlFamily::LinearRegression;
    lin_spec.dataset = "line.csv";
    spit(dir / "line.csv", gen_synthetic("line", 10, 30));
    DaEngine lin(lin_spec, dir.string());
    lin.preprocess();
    lin.train_now(0);
    std::filesystem::create_directories(dir / "bbx");
    std::filesystem::copy_file(dir / "da1_model.mlqm", dir / "bbx" / "model.mlqm");

    auto spec = cluster2_spec();
    spec.blackbox = true;
    spec.blackbox_model_path = "bbx";
    spec.blackbox_algorithm = "k_means";
    spec.dataset = "loads.csv";
    DaEngine engine(spec, dir.string());
    CHECK_THROWS_WITH_AS(engine.load_blackbox_model(),
                         doctest::Contains("does not match blackbox_import_algorithm"), MlError);

    // right family, wrong schema: import as linear_regression but Φ disagrees
    spec.blackbox_algorithm = "linear_regression";
    DaEngine schema(spec, dir.string());
    CHECK_THROWS_WITH_AS(schema.load_blackbox_model(), doctest::Contains("schema"), MlError);

    // missing directory
    spec.blackbox_model_path = "nowhere";
    spec.blackbox_algorithm = "k_means";
    DaEngine missing(spec, dir.string());
    CHECK_THROWS_WITH_AS(missing.load_blackbox_model(), doctest::Contains("not found"), MlError);
}

TEST_CASE("training log lines carry the wall-clock stamp up front") {
    TrainingReport rep;
    rep.family = "k_means";
    rep.train_rows = 8;
    rep.test_rows = 2;
    TrainedModel m;
    m.family = MlFamily::KMeans;
    m.task = MlTask::Clustering;
    m.hyper_echo = {{"seed", "10"}, {"k", "2"}};
    m.params = KMeansModel{};
    rep.iterations = 3;
    rep.final_inertia = 1.5;
    std::string line = training_log_line("2026-08-16T00:00:00Z", m, rep);
    CHECK(line ==
          "2026-08-16T00:00:00Z family=k_means model=kmeans seed=10 k=2 train_rows=8 "
          "test_rows=2 dropped_rows=0 iterations=3 inertia=1.5");

    std::string now = iso_utc_now();
    REQUIRE(now.size() == 20);
    CHECK(now[4] == '-');
    CHECK(now[10] == 'T');
    CHECK(now[19] == 'Z');
}
