#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

// End-to-end tests of the mlqc driver: every subcommand is spawned as a child
// process and judged by its exit code, its streams, and the files it writes.
// Exit-code contract: 0 success, 1 domain failure, 2 environment failure.

#include <cstdlib>
#include <filesystem>
#include <string>

#include <sys/wait.h>

#include "json.hpp"

#include "mlq/ml/io.hpp"
#include "mlq/ml/model.hpp"
#include "support/scratch.hpp"

namespace fs = std::filesystem;
using testsupport::scratch_dir;
using testsupport::slurp;
using testsupport::spit;

namespace {

struct Cmd {
    int code = -1;
    std::string out, err;
};

// Spawns the driver with sh-level redirection; `env` may carry VAR=value
// prefixes. Output files land next to the test's other scratch files.
Cmd run_cli(const std::string& args, const fs::path& dir, const std::string& env = "") {
    fs::path out = dir / "__stdout.txt", err = dir / "__stderr.txt";
    std::string cmd = env + (env.empty() ? "" : " ") + MLQC_PATH + " " + args + " > " +
                      out.string() + " 2> " + err.string();
    int rc = std::system(cmd.c_str());
    Cmd r;
    r.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

const char* kPingPong = R"(
thing PingClient {
    message ping()
    message pong()
    required port pp {
        receives pong
        sends ping
    }
    property pongs : Int32 = 0
    statechart init Run {
        state Run {
            on entry if (pongs < 5) pp!ping()
            transition -> Run event m : pp?pong action pongs = pongs + 1
        }
    }
}
thing PongServer {
    message ping()
    message pong()
    provided port pp {
        receives ping
        sends pong
    }
    statechart init Waiting {
        state Waiting {
            transition -> Waiting event m : pp?ping action pp!pong()
        }
    }
}
configuration PingPong {
    instance client : PingClient
    instance server : PongServer
    connector client.pp => server.pp
}
)";

// Trains a decision tree from gate.csv at boot, then answers two probes.
const char* kGate = R"(
thing Gate {
    message query(code : Int32)
    message yes()
    message no()
    provided port p {
        receives query
        sends yes, no
    }
    property code : Int32 = 0
    property verdict : Boolean = false
    data_analytics da1 {
        labels ON
        features code, verdict
        prediction_results verdict
        dataset "gate.csv"
        automl OFF
        sequential TRUE
        model_algorithm decision_tree_classifier gatekeeper (seed 10)
    }
    statechart init Boot {
        state Boot {
            on entry do
                da_preprocess da1
                da_train da1
            end
            transition -> Ready
        }
        state Ready {
            transition -> Ready event m : p?query action do
                code = m.code
                da_predict da1(code)
                if (verdict == true) p!yes() else p!no()
            end
        }
    }
}
thing Probe {
    message query(code : Int32)
    message yes()
    message no()
    required port p {
        receives yes, no
        sends query
    }
    property fired : Boolean = false
    statechart init Go {
        state Go {
            on entry if (fired == false) do
                fired = true
                p!query(900)
                p!query(100)
            end
            transition -> Go event m : p?yes
            transition -> Go event m2 : p?no
        }
    }
}
configuration GateCheck {
    instance gate : Gate
    instance probe : Probe
    connector probe.p => gate.p
}
)";

std::string gate_csv() {
    std::string csv;
    for (int i = 0; i < 40; ++i) {
        int code = (i * 97 + 13) % 1000;
        csv += std::to_string(code) + (code > 500 ? ",true" : ",false") + "\n";
    }
    return csv;
}

// x <= 500 answers false, above answers true; no training involved, so every
// prediction in the eval fixtures is hand-checkable.
mlq::ml::TrainedModel threshold_tree() {
    mlq::ml::TrainedModel m;
    m.family = mlq::MlFamily::DecisionTreeClassifier;
    m.task = mlq::MlTask::Classification;
    m.inputs = {{"code", "Int32"}};
    m.label_name = "verdict";
    m.label_type = "Boolean";
    m.classes = {0.0, 1.0};
    m.input_dictionaries = {{}};
    mlq::ml::TreeModel t;
    t.nodes.push_back({0, 500.0, 1, 2, 0.0});
    t.nodes.push_back({-1, 0.0, -1, -1, 0.0});
    t.nodes.push_back({-1, 0.0, -1, -1, 1.0});
    m.params = t;
    return m;
}

// y = 2x + 1 exactly.
mlq::ml::TrainedModel line_model() {
    mlq::ml::TrainedModel m;
    m.family = mlq::MlFamily::LinearRegression;
    m.task = mlq::MlTask::Regression;
    m.inputs = {{"x", "Double"}};
    m.label_name = "y";
    m.label_type = "Double";
    m.input_dictionaries = {{}};
    m.params = mlq::ml::LinearModel{{2.0}, 1.0};
    return m;
}

} // namespace

TEST_CASE("parse accepts a model, reports syntax errors, distinguishes missing files") {
    auto dir = scratch_dir("cli_parse");
    spit(dir / "pp.mlq", kPingPong);
    spit(dir / "bad.mlq", "thing T {\n    port p\n}\n");

    auto ok = run_cli("parse " + (dir / "pp.mlq").string(), dir);
    CHECK(ok.code == 0);
    CHECK(ok.err.empty());
    CHECK(ok.out.empty()); // canonical text only on request

    auto bad = run_cli("parse " + (dir / "bad.mlq").string(), dir);
    CHECK(bad.code == 1);
    CHECK(bad.err.find("[P0") != std::string::npos);
    CHECK(bad.err.find("bad.mlq:") != std::string::npos);

    auto missing = run_cli("parse " + (dir / "nosuch.mlq").string(), dir);
    CHECK(missing.code == 2);
    CHECK(missing.err.find("nosuch.mlq") != std::string::npos);
}

TEST_CASE("parse --emit-canonical is a fixed point of itself") {
    auto dir = scratch_dir("cli_canon");
    spit(dir / "pp.mlq", kPingPong);

    auto first = run_cli("parse --emit-canonical " + (dir / "pp.mlq").string(), dir);
    REQUIRE(first.code == 0);
    CHECK(first.out.find("thing PingClient {") != std::string::npos);

    spit(dir / "canon.mlq", first.out);
    auto second = run_cli("parse --emit-canonical " + (dir / "canon.mlq").string(), dir);
    REQUIRE(second.code == 0);
    CHECK(second.out == first.out);
}

TEST_CASE("validate exit codes: clean, broken, warnings, strict mode, missing input") {
    auto dir = scratch_dir("cli_validate");
    spit(dir / "pp.mlq", kPingPong);
    // V1: the entry guard compares a Boolean property with an integer
    spit(dir / "invalid.mlq", R"(
thing T {
    property flag : Boolean = false
    statechart init S {
        state S {
            on entry if (flag < 3) print "?"
        }
    }
}
configuration C { instance t : T }
)");
    // W001: two analytics components write the same prediction property
    spit(dir / "warn.mlq", R"(
thing T {
    property x : Double
    property out : Double
    data_analytics a {
        labels ON
        features x, out
        prediction_results out
        dataset "d.csv"
        model_algorithm linear_regression lr
    }
    data_analytics b {
        labels ON
        features x, out
        prediction_results out
        dataset "d.csv"
        model_algorithm linear_regression lr2
    }
    statechart init S { state S { } }
}
configuration C { instance t : T }
)");

    auto clean = run_cli("validate " + (dir / "pp.mlq").string(), dir);
    CHECK(clean.code == 0);
    CHECK(clean.err.empty());

    auto bad = run_cli("validate " + (dir / "invalid.mlq").string(), dir);
    CHECK(bad.code == 1);
    CHECK(bad.err.find("[V1]") != std::string::npos);

    auto warn = run_cli("validate " + (dir / "warn.mlq").string(), dir);
    CHECK(warn.code == 0);
    CHECK(warn.err.find("[W001]") != std::string::npos);

    auto strict = run_cli("validate --strict " + (dir / "warn.mlq").string(), dir);
    CHECK(strict.code == 1);

    auto strict_clean = run_cli("validate --strict " + (dir / "pp.mlq").string(), dir);
    CHECK(strict_clean.code == 0);

    auto missing = run_cli("validate " + (dir / "nosuch.mlq").string(), dir);
    CHECK(missing.code == 2);
}

TEST_CASE("validate reports machine-readable diagnostics on request") {
    auto dir = scratch_dir("cli_json");
    spit(dir / "invalid.mlq", R"(
thing T {
    property flag : Boolean = false
    statechart init S {
        state S {
            on entry if (flag < 3) print "?"
        }
    }
}
configuration C { instance t : T }
)");

    auto r = run_cli("validate --diag-format json " + (dir / "invalid.mlq").string(), dir);
    CHECK(r.code == 1);
    auto arr = nlohmann::json::parse(r.out);
    REQUIRE(arr.is_array());
    REQUIRE(!arr.empty());
    CHECK(arr[0]["code"] == "V1");
    CHECK(arr[0]["severity"] == "error");
    CHECK(arr[0]["line"].get<int>() == 6);
    CHECK(arr[0]["message"].get<std::string>().find("Boolean") != std::string::npos);
}

TEST_CASE("validate passes a pure fragment library that compile refuses") {
    auto dir = scratch_dir("cli_fragment");
    spit(dir / "lib.mlq", R"(
thing fragment Msgs {
    message ping()
    message pong()
}
)");

    auto v = run_cli("validate " + (dir / "lib.mlq").string(), dir);
    CHECK(v.code == 0);
    CHECK(v.err.empty());

    // the same file is not a buildable system
    auto c = run_cli("compile --out " + (dir / "out").string() + " " +
                         (dir / "lib.mlq").string(),
                     dir);
    CHECK(c.code == 1);
    CHECK(c.err.find("[C6]") != std::string::npos);
}

TEST_CASE("validate surfaces automl defaults only when asked") {
    auto dir = scratch_dir("cli_notes");
    spit(dir / "auto.mlq", R"(
thing T {
    property x : Double
    property c : Long = 0
    data_analytics da1 {
        labels OFF
        features x
        prediction_results c
        dataset "d.csv"
        automl ON
        model_algorithm k_means km
    }
    statechart init S { state S { } }
}
configuration C { instance t : T }
)");

    auto quiet = run_cli("validate " + (dir / "auto.mlq").string(), dir);
    CHECK(quiet.code == 0);
    CHECK(quiet.err.find("N001") == std::string::npos);

    auto noisy = run_cli("validate --automl-notes " + (dir / "auto.mlq").string(), dir);
    CHECK(noisy.code == 0);
    CHECK(noisy.err.find("[N001]") != std::string::npos);
}

TEST_CASE("compile writes plan artifacts and recompilation is byte-identical") {
    auto dir = scratch_dir("cli_compile");
    spit(dir / "pp.mlq", kPingPong);

    auto first = run_cli("compile --out " + (dir / "a").string() + " " +
                             (dir / "pp.mlq").string(),
                         dir);
    REQUIRE(first.code == 0);
    REQUIRE(fs::exists(dir / "a" / "PingPong.mlqplan"));
    REQUIRE(fs::exists(dir / "a" / "manifest.txt"));
    CHECK(slurp(dir / "a" / "PingPong.mlqplan").rfind("MLQPLAN/1\n", 0) == 0);
    CHECK(slurp(dir / "a" / "manifest.txt").find("PingPong.mlqplan fnv1a64 ") !=
          std::string::npos);
    CHECK(first.out.find("PingPong.mlqplan") != std::string::npos);

    auto second = run_cli("compile --out " + (dir / "b").string() + " " +
                              (dir / "pp.mlq").string(),
                          dir);
    REQUIRE(second.code == 0);
    CHECK(slurp(dir / "a" / "PingPong.mlqplan") == slurp(dir / "b" / "PingPong.mlqplan"));
    CHECK(slurp(dir / "a" / "manifest.txt") == slurp(dir / "b" / "manifest.txt"));
}

TEST_CASE("compile rejects broken models, unknown backends, unwritable outputs") {
    auto dir = scratch_dir("cli_compile_err");
    spit(dir / "pp.mlq", kPingPong);
    spit(dir / "invalid.mlq", R"(
thing T {
    property flag : Boolean = false
    statechart init S {
        state S {
            on entry if (flag < 3) print "?"
        }
    }
}
configuration C { instance t : T }
)");
    spit(dir / "blocker.txt", "not a directory\n");

    auto bad = run_cli("compile --out " + (dir / "never").string() + " " +
                           (dir / "invalid.mlq").string(),
                       dir);
    CHECK(bad.code == 1);
    CHECK(bad.err.find("[V1]") != std::string::npos);
    CHECK(!fs::exists(dir / "never"));

    auto backend = run_cli("compile --backend java " + (dir / "pp.mlq").string(), dir);
    CHECK(backend.code == 1);
    CHECK(backend.err.find("unknown backend 'java'") != std::string::npos);

    auto blocked = run_cli("compile --out " + (dir / "blocker.txt" / "sub").string() + " " +
                               (dir / "pp.mlq").string(),
                           dir);
    CHECK(blocked.code == 2);

    auto missing = run_cli("compile " + (dir / "nosuch.mlq").string(), dir);
    CHECK(missing.code == 2);
}

TEST_CASE("run simulates a model and replays its compiled plan with the same trace") {
    auto dir = scratch_dir("cli_run");
    spit(dir / "pp.mlq", kPingPong);

    auto interp = run_cli("run --trace-out " + (dir / "interp.txt").string() + " " +
                              (dir / "pp.mlq").string(),
                          dir);
    REQUIRE(interp.code == 0);
    std::string trace = slurp(dir / "interp.txt");
    CHECK(trace.rfind("0\tenter-state\tclient\tRun\n", 0) == 0);
    CHECK(trace.find("terminate") == std::string::npos); // quiescent, not halted

    auto compiled = run_cli("compile --out " + (dir / "out").string() + " " +
                                (dir / "pp.mlq").string(),
                            dir);
    REQUIRE(compiled.code == 0);
    auto replay = run_cli("run --trace-out " + (dir / "replay.txt").string() + " " +
                              (dir / "out" / "PingPong.mlqplan").string(),
                          dir);
    REQUIRE(replay.code == 0);
    CHECK(slurp(dir / "replay.txt") == trace);

    // without --trace-out the trace goes to stdout
    auto to_stdout = run_cli("run " + (dir / "pp.mlq").string(), dir);
    REQUIRE(to_stdout.code == 0);
    CHECK(to_stdout.out == trace);
}

TEST_CASE("run exit codes: fault events, configuration mix-ups, corrupt plans") {
    auto dir = scratch_dir("cli_run_err");
    spit(dir / "fault.mlq", R"(
thing T {
    property z : Int32 = 0
    statechart init S {
        state S {
            on entry z = 1 / 0
        }
    }
}
configuration C { instance t : T }
)");
    spit(dir / "two.mlq", std::string(kPingPong) + R"(
configuration Second {
    instance client : PingClient
    instance server : PongServer
    connector client.pp => server.pp
}
)");
    spit(dir / "vnext.mlqplan", "MLQPLAN/2\nconfig X\n");

    auto fault = run_cli("run --trace-out " + (dir / "fault.txt").string() + " " +
                             (dir / "fault.mlq").string(),
                         dir);
    CHECK(fault.code == 1);
    std::string trace = slurp(dir / "fault.txt"); // trace still written
    CHECK(trace.find("\terror\t") != std::string::npos);
    CHECK(trace.find("integer division by zero") != std::string::npos);

    auto ambiguous = run_cli("run " + (dir / "two.mlq").string(), dir);
    CHECK(ambiguous.code == 1);
    CHECK(ambiguous.err.find("several configurations") != std::string::npos);

    auto chosen = run_cli("run --config Second " + (dir / "two.mlq").string(), dir);
    CHECK(chosen.code == 0);

    auto unknown = run_cli("run --config Nope " + (dir / "two.mlq").string(), dir);
    CHECK(unknown.code == 1);
    CHECK(unknown.err.find("unknown configuration") != std::string::npos);

    auto vnext = run_cli("run " + (dir / "vnext.mlqplan").string(), dir);
    CHECK(vnext.code == 1);
    CHECK(vnext.err.find("unsupported plan version") != std::string::npos);

    auto missing = run_cli("run " + (dir / "nosuch.mlq").string(), dir);
    CHECK(missing.code == 2);
}

TEST_CASE("run resolves datasets against --dataset-root or MLQ_DATASET_ROOT") {
    auto dir = scratch_dir("cli_run_data");
    spit(dir / "gate.mlq", kGate);
    spit(dir / "d1" / "gate.csv", gate_csv());
    spit(dir / "d2" / "gate.csv", gate_csv());

    auto flag = run_cli("run --dataset-root " + (dir / "d1").string() + " --trace-out " +
                            (dir / "flag.txt").string() + " " + (dir / "gate.mlq").string(),
                        dir);
    REQUIRE(flag.code == 0);
    std::string trace = slurp(dir / "flag.txt");
    CHECK(trace.find("da-train\tgate\tda1 family=decision_tree_classifier") !=
          std::string::npos);
    CHECK(trace.find("da1(900) -> true") != std::string::npos);
    CHECK(trace.find("da1(100) -> false") != std::string::npos);
    CHECK(fs::exists(dir / "d1" / "gatekeeper.mlqm"));

    auto env = run_cli("run --trace-out " + (dir / "env.txt").string() + " " +
                           (dir / "gate.mlq").string(),
                       dir, "MLQ_DATASET_ROOT=" + (dir / "d2").string());
    REQUIRE(env.code == 0);
    CHECK(slurp(dir / "env.txt") == trace);
    CHECK(fs::exists(dir / "d2" / "gatekeeper.mlqm"));

    // without either, the relative dataset path has nowhere to resolve
    auto nowhere = run_cli("run " + (dir / "gate.mlq").string(), dir);
    CHECK(nowhere.code == 1);
}

TEST_CASE("gen-data is deterministic, honors row counts, rejects unknown presets") {
    auto dir = scratch_dir("cli_gendata");

    auto a = run_cli("gen-data line --seed 7 --rows 17 --out " + (dir / "a.csv").string(), dir);
    auto b = run_cli("gen-data line --seed 7 --rows 17 --out " + (dir / "b.csv").string(), dir);
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    std::string csv = slurp(dir / "a.csv");
    CHECK(csv == slurp(dir / "b.csv"));
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 17);

    auto reseeded = run_cli("gen-data line --seed 8 --rows 17 --out " +
                                (dir / "c.csv").string(),
                            dir);
    REQUIRE(reseeded.code == 0);
    CHECK(slurp(dir / "c.csv") != csv);

    // stdout carries the same bytes as --out
    auto piped = run_cli("gen-data line --seed 7 --rows 17", dir);
    REQUIRE(piped.code == 0);
    CHECK(piped.out == csv);

    auto unknown = run_cli("gen-data iris", dir);
    CHECK(unknown.code == 1);
    CHECK(unknown.err.find("unknown preset 'iris'") != std::string::npos);
    CHECK(unknown.err.find("smarthome-cluster") != std::string::npos);
}

TEST_CASE("eval scores a classifier document against hand-counted truth") {
    auto dir = scratch_dir("cli_eval_cls");
    mlq::ml::write_model_file((dir / "tree.mlqm").string(), threshold_tree());

    // predictions: true true false false true; truth flips rows 2 and 4:
    // tp=2 fp=1 tn=1 fn=1 -> accuracy 3/5, precision = recall = f1 = 2/3
    spit(dir / "mixed.csv", "900,true\n800,false\n100,false\n40,true\n700,true\n");
    auto mixed = run_cli("eval " + (dir / "tree.mlqm").string() + " " +
                             (dir / "mixed.csv").string(),
                         dir);
    REQUIRE(mixed.code == 0);
    CHECK(mixed.out.find("task = classification") != std::string::npos);
    CHECK(mixed.out.find("rows = 5") != std::string::npos);
    CHECK(mixed.out.find("accuracy=0.6 ") != std::string::npos);
    CHECK(mixed.out.find("precision=0.6666666666666666 ") != std::string::npos);
    CHECK(mixed.out.find("recall=0.6666666666666666 ") != std::string::npos);
    CHECK(mixed.out.find("f1=0.6666666666666666") != std::string::npos);

    spit(dir / "perfect.csv", "900,true\n800,true\n100,false\n40,false\n700,true\n");
    auto perfect = run_cli("eval " + (dir / "tree.mlqm").string() + " " +
                               (dir / "perfect.csv").string(),
                           dir);
    REQUIRE(perfect.code == 0);
    CHECK(perfect.out.find("accuracy=1.0 precision=1.0 recall=1.0 f1=1.0") !=
          std::string::npos);
}

TEST_CASE("eval scores a regression document with absolute and squared error") {
    auto dir = scratch_dir("cli_eval_reg");
    mlq::ml::write_model_file((dir / "line.mlqm").string(), line_model());

    // predictions 3, 5, 7 against truth 3, 6, 5: errors 0, 1, 2
    spit(dir / "reg.csv", "1,3\n2,6\n3,5\n");
    auto r = run_cli("eval " + (dir / "line.mlqm").string() + " " + (dir / "reg.csv").string(),
                     dir);
    REQUIRE(r.code == 0);
    CHECK(r.out.find("task = regression") != std::string::npos);
    CHECK(r.out.find("mae=1.0 mse=1.6666666666666667") != std::string::npos);
}

TEST_CASE("eval rejects corrupt documents and mismatched test data") {
    auto dir = scratch_dir("cli_eval_err");
    mlq::ml::write_model_file((dir / "tree.mlqm").string(), threshold_tree());
    spit(dir / "garbage.mlqm", "not a model document\n");
    spit(dir / "narrow.csv", "900\n100\n");
    spit(dir / "ok.csv", "900,true\n");

    auto garbage = run_cli("eval " + (dir / "garbage.mlqm").string() + " " +
                               (dir / "ok.csv").string(),
                           dir);
    CHECK(garbage.code == 1);
    CHECK(garbage.err.find("error:") != std::string::npos);

    auto narrow = run_cli("eval " + (dir / "tree.mlqm").string() + " " +
                              (dir / "narrow.csv").string(),
                          dir);
    CHECK(narrow.code == 1);

    auto no_model = run_cli("eval " + (dir / "nosuch.mlqm").string() + " " +
                                (dir / "ok.csv").string(),
                            dir);
    CHECK(no_model.code == 2);

    auto no_data = run_cli("eval " + (dir / "tree.mlqm").string() + " " +
                               (dir / "nosuch.csv").string(),
                           dir);
    CHECK(no_data.code == 2);
}

TEST_CASE("usage mistakes exit with the environment code") {
    auto dir = scratch_dir("cli_usage");
    spit(dir / "pp.mlq", kPingPong);

    CHECK(run_cli("", dir).code == 2);                       // no subcommand
    CHECK(run_cli("frobnicate x", dir).code == 2);           // unknown subcommand
    CHECK(run_cli("parse", dir).code == 2);                  // missing argument
    CHECK(run_cli("validate --diag-format yaml " + (dir / "pp.mlq").string(), dir).code == 2);
    CHECK(run_cli("run --no-such-flag " + (dir / "pp.mlq").string(), dir).code == 2);

    auto help = run_cli("--help", dir);
    CHECK(help.code == 0);
    CHECK(help.out.find("validate") != std::string::npos);
}
