#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mlq/parser.hpp"
#include "mlq/resolve.hpp"
#include "mlq/validate.hpp"

using namespace mlq;

namespace {

ResolvedModel resolved(const char* src) {
    auto parsed = parse_model(src);
    REQUIRE(parsed.ok());
    auto r = resolve(parsed.model);
    REQUIRE(r.ok());
    return std::move(r.model);
}

std::vector<std::string> error_codes(const std::vector<Diagnostic>& diags) {
    std::vector<std::string> out;
    for (const auto& d : diags)
        if (d.severity == Severity::Error) out.push_back(d.code);
    return out;
}

} // namespace

TEST_CASE("a well-formed model yields no validity or completeness errors") {
    auto model = resolved(R"(
thing Worker {
    message tick()
    provided port in { receives tick }
    property count : Int32 = 0
    property label : String = "idle"
    property guess : String = ""
    data_analytics da1 {
        labels ON
        features count, label
        prediction_results guess
        dataset "data/w.csv"
        automl OFF
        model_algorithm decision_tree_classifier dt (max_depth 4, seed 10)
    }
    statechart init Idle {
        state Idle {
            transition -> Idle event m : in?tick action do
                count = count + 1
                if (count > 10) da_predict da1(count)
            end
        }
    }
}
configuration C {
    instance w : Worker
}
)");
    CHECK(check_valid(model).empty());
    CHECK(check_complete(model).empty());
}

TEST_CASE("cross-family arithmetic is a type error") {
    auto model = resolved(R"(
thing T {
    property i : Int32 = 1
    property f : Float = 1.0
    property x : Float = 0.0
    statechart init S {
        state S {
            on entry x = i + f
        }
    }
}
configuration C { instance t : T }
)");
    auto codes = error_codes(check_valid(model));
    REQUIRE(codes.size() == 1);
    CHECK(codes[0] == "V1");
}

TEST_CASE("integer literals adapt to either integer type, floats to either float type") {
    auto model = resolved(R"(
thing T {
    property a : Int32 = 5
    property b : Long = 5
    property c : Long = 5000000000
    property d : Float = 2.5
    property e : Double = 2.5
    property f : Double = a + 1 * 2
}
configuration C { instance t : T }
)");
    auto codes = error_codes(check_valid(model));
    // only f is wrong: Int32 expression into Double
    REQUIRE(codes.size() == 1);
    CHECK(codes[0] == "V1");
}

TEST_CASE("narrowing assignments are rejected, widening allowed") {
    auto model = resolved(R"(
thing T {
    property small : Int32 = 1
    property big : Long = 2
    property w : Long = 0
    property n : Int32 = 0
    statechart init S {
        state S {
            on entry do
                w = small
                n = big
            end
        }
    }
}
configuration C { instance t : T }
)");
    auto codes = error_codes(check_valid(model));
    REQUIRE(codes.size() == 1); // only n = big
    CHECK(codes[0] == "V1");
}

TEST_CASE("string concatenation types as String, mixed + does not") {
    auto model = resolved(R"(
thing T {
    property s : String = "a" + "b"
    property bad : String = "a" + 1
}
configuration C { instance t : T }
)");
    auto codes = error_codes(check_valid(model));
    REQUIRE(codes.size() == 1);
    CHECK(codes[0] == "V1");
}

TEST_CASE("comparisons need matching families and if-conditions must be Boolean") {
    auto model = resolved(R"(
thing T {
    property i : Int32 = 1
    property f : Float = 1.0
    statechart init S {
        state S {
            on entry do
                if (i < f) print "no"
                if (i + 1) print "no"
            end
        }
    }
}
configuration C { instance t : T }
)");
    auto codes = error_codes(check_valid(model));
    CHECK(codes.size() == 2);
}

TEST_CASE("equality works on Boolean and String but ordering does not") {
    auto model = resolved(R"(
thing T {
    property b : Boolean = true
    property s : String = "x"
    statechart init S {
        state S {
            on entry do
                if (b == false) print "ok"
                if (s == "x") print "ok"
                if (s < "y") print "no"
            end
        }
    }
}
configuration C { instance t : T }
)");
    auto codes = error_codes(check_valid(model));
    REQUIRE(codes.size() == 1);
    CHECK(codes[0] == "V1");
}

TEST_CASE("two transitions for the same event violate determinism") {
    auto model = resolved(R"(
thing T {
    message go()
    provided port p { receives go }
    statechart init A {
        state A {
            transition -> A event m : p?go
            transition -> B event n : p?go
        }
        state B { }
    }
}
configuration C { instance t : T }
)");
    auto codes = error_codes(check_valid(model));
    REQUIRE(codes.size() == 1);
    CHECK(codes[0] == "V2");
}

TEST_CASE("two eventless transitions violate determinism") {
    auto model = resolved(R"(
thing T {
    statechart init A {
        state A {
            transition -> B
            transition -> A
        }
        state B { }
    }
}
configuration C { instance t : T }
)");
    auto codes = error_codes(check_valid(model));
    REQUIRE(codes.size() == 1);
    CHECK(codes[0] == "V2");
}

TEST_CASE("sending a message the port does not declare as sendable is V3") {
    auto model = resolved(R"(
thing T {
    message ping()
    message pong()
    provided port p {
        receives ping
        sends pong
    }
    statechart init S {
        state S {
            on entry p!ping()
        }
    }
}
configuration C { instance t : T }
)");
    auto codes = error_codes(check_valid(model));
    REQUIRE(codes.size() == 1);
    CHECK(codes[0] == "V3");
}

TEST_CASE("da_predict arity and argument types are checked against the features") {
    auto model = resolved(R"(
thing T {
    property x : Double
    property y : Double
    property lbl : Boolean = false
    property out : Boolean = false
    data_analytics da1 {
        labels ON
        features x, y, lbl
        prediction_results out
        dataset "d.csv"
        model_algorithm decision_tree_classifier dt
    }
    statechart init S {
        state S {
            on entry do
                da_predict da1(x)
                da_predict da1(x, true)
            end
        }
    }
}
configuration C { instance t : T }
)");
    auto codes = error_codes(check_valid(model));
    REQUIRE(codes.size() == 2);
    CHECK(codes[0] == "V4"); // arity
    CHECK(codes[1] == "V1"); // Boolean where Double expected
}

TEST_CASE("classification prediction target must match the label type") {
    auto model = resolved(R"(
thing T {
    property x : Double
    property lbl : String = ""
    property out : Boolean = false
    data_analytics da1 {
        labels ON
        features x, lbl
        prediction_results out
        dataset "d.csv"
        model_algorithm decision_tree_classifier dt
    }
}
configuration C { instance t : T }
)");
    auto codes = error_codes(check_valid(model));
    REQUIRE(codes.size() == 1);
    CHECK(codes[0] == "V5");
}

TEST_CASE("regression prediction target must be numeric") {
    auto model = resolved(R"(
thing T {
    property x : Double
    property y : Double
    property out : String = ""
    data_analytics da1 {
        labels ON
        features x, y
        prediction_results out
        dataset "d.csv"
        model_algorithm linear_regression lr
    }
}
configuration C { instance t : T }
)");
    auto codes = error_codes(check_valid(model));
    REQUIRE(codes.size() == 1);
    CHECK(codes[0] == "V5");
}

TEST_CASE("Boolean clustering output needs exactly two clusters") {
    const char* tmpl = R"(
thing T {
    property x : Double
    property out : Boolean = false
    data_analytics da1 {
        labels OFF
        features x
        prediction_results out
        dataset "d.csv"
        model_algorithm k_means km (k %d)
    }
}
configuration C { instance t : T }
)";
    char buf[1024];
    std::snprintf(buf, sizeof buf, tmpl, 2);
    CHECK(error_codes(check_valid(resolved(buf))).empty());
    std::snprintf(buf, sizeof buf, tmpl, 3);
    auto codes = error_codes(check_valid(resolved(buf)));
    REQUIRE(codes.size() == 1);
    CHECK(codes[0] == "V5");
}

TEST_CASE("connectors must join required to provided with compatible messages") {
    auto model = resolved(R"(
thing A {
    message ping()
    message pong()
    required port out { receives pong sends ping }
}
thing B {
    message ping()
    message pong()
    message extra()
    provided port in { receives ping sends pong, extra }
}
configuration C {
    instance a : A
    instance b : B
    connector a.out => b.in
}
)");
    auto codes = error_codes(check_valid(model));
    // b may send `extra` which a cannot receive
    REQUIRE(codes.size() == 1);
    CHECK(codes[0] == "V6");
}

TEST_CASE("same-direction connector endpoints are rejected") {
    auto model = resolved(R"(
thing A {
    message ping()
    provided port p { receives ping }
}
configuration C {
    instance x : A
    instance y : A
    connector x.p => y.p
}
)");
    auto codes = error_codes(check_valid(model));
    REQUIRE(codes.size() == 1);
    CHECK(codes[0] == "V6");
}

TEST_CASE("instantiated things need a statechart") {
    auto model = resolved(R"(
thing NoChart {
    property x : Int32
}
configuration C { instance n : NoChart }
)");
    auto codes = error_codes(check_complete(model));
    REQUIRE(codes.size() == 1);
    CHECK(codes[0] == "C1");
}

TEST_CASE("data analytics needs dataset, features and a prediction target") {
    auto model = resolved(R"(
thing T {
    property x : Double
    property out : Double
    data_analytics da1 {
        labels ON
        features x, out
        prediction_results out
        model_algorithm linear_regression lr
    }
    statechart init S { state S { } }
}
configuration C { instance t : T }
)");
    auto codes = error_codes(check_complete(model));
    REQUIRE(codes.size() == 1);
    CHECK(codes[0] == "C2"); // dataset missing
}

TEST_CASE("a trainable component must declare its algorithm") {
    auto model = resolved(R"(
thing T {
    property x : Double
    property out : Double
    data_analytics da1 {
        labels ON
        features x, out
        prediction_results out
        dataset "d.csv"
    }
    statechart init S { state S { } }
}
configuration C { instance t : T }
)");
    auto codes = error_codes(check_complete(model));
    REQUIRE(codes.size() == 1);
    CHECK(codes[0] == "C3");
}

TEST_CASE("family must fit the task derived from the labels") {
    auto model = resolved(R"(
thing T {
    property x : Double
    property out : Double
    data_analytics da1 {
        labels OFF
        features x
        prediction_results out
        dataset "d.csv"
        model_algorithm linear_regression lr
    }
    statechart init S { state S { } }
}
configuration C { instance t : T }
)");
    auto codes = error_codes(check_complete(model));
    REQUIRE(codes.size() == 1);
    CHECK(codes[0] == "C3");
}

TEST_CASE("unknown hyperparameters for the family are rejected") {
    auto model = resolved(R"(
thing T {
    property x : Double
    property out : Double
    data_analytics da1 {
        labels ON
        features x, out
        prediction_results out
        dataset "d.csv"
        model_algorithm linear_regression lr (learning_rate 0.1)
    }
    statechart init S { state S { } }
}
configuration C { instance t : T }
)");
    auto codes = error_codes(check_complete(model));
    REQUIRE(codes.size() == 1);
    CHECK(codes[0] == "C3");
}

TEST_CASE("black-box components must name a stored model and import algorithm") {
    auto model = resolved(R"(
thing T {
    property x : Double
    property out : Int32
    data_analytics da1 {
        labels OFF
        features x
        prediction_results out
        dataset "d.csv"
        blackbox_ml true
    }
    statechart init S { state S { } }
}
configuration C { instance t : T }
)");
    auto codes = error_codes(check_complete(model));
    REQUIRE(codes.size() == 2); // missing model path + missing import algorithm
    CHECK(codes[0] == "C4");
    CHECK(codes[1] == "C4");
}

TEST_CASE("black-box components reject training configuration and training actions") {
    auto model = resolved(R"(
thing T {
    property x : Double
    property out : Int32
    data_analytics da1 {
        labels OFF
        features x
        prediction_results out
        dataset "d.csv"
        model_algorithm k_means km
        training_results "t.txt"
        blackbox_ml true
        blackbox_ml_model "models/km"
        blackbox_import_algorithm "k_means"
    }
    statechart init S {
        state S {
            on entry da_train da1
        }
    }
}
configuration C { instance t : T }
)");
    auto codes = error_codes(check_complete(model));
    REQUIRE(codes.size() == 3);
    for (const auto& c : codes) CHECK(c == "C4");
}

TEST_CASE("actions must reference an existing analytics component") {
    auto model = resolved(R"(
thing T {
    statechart init S {
        state S {
            on entry da_train ghost
        }
    }
}
configuration C { instance t : T }
)");
    auto codes = error_codes(check_complete(model));
    REQUIRE(codes.size() == 1);
    CHECK(codes[0] == "C5");
}

TEST_CASE("compile and run targets need at least one configuration") {
    auto model = resolved(R"(
thing T {
    statechart init S { state S { } }
}
)");
    auto codes = error_codes(check_complete(model));
    REQUIRE(codes.size() == 1);
    CHECK(codes[0] == "C6");

    ValidateOptions opts;
    opts.require_configuration = false;
    CHECK(check_complete(model, opts).empty());
}

TEST_CASE("two components writing one prediction property draw a warning") {
    auto model = resolved(R"(
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
    auto diags = check_valid(model);
    CHECK(error_codes(diags).empty());
    bool w001 = false;
    for (const auto& d : diags)
        if (d.code == "W001" && d.severity == Severity::Warning) w001 = true;
    CHECK(w001);
}

TEST_CASE("automl fills sequential, scaler and engine defaults with notes") {
    auto model = resolved(R"(
thing T {
    property x : Double
    property out : Boolean = false
    data_analytics da1 {
        labels OFF
        features x
        prediction_results out
        dataset "d.csv"
        automl ON
        timestamps ON
        model_algorithm k_means km
    }
    statechart init S { state S { } }
}
configuration C { instance t : T }
)");
    auto notes = apply_automl_defaults(model);
    REQUIRE(notes.size() == 3);
    for (const auto& n : notes) {
        CHECK(n.code == "N001");
        CHECK(n.severity == Severity::Note);
    }
    const auto& da = model.things[0].analytics[0];
    REQUIRE(da.sequential.has_value());
    CHECK(*da.sequential);
    CHECK(da.scaler == ScalerKind::Standard);
    CHECK(da.dalib == "builtin");

    // idempotent: a second application changes nothing
    CHECK(apply_automl_defaults(model).empty());
}

TEST_CASE("an explicit sequential FALSE survives automl") {
    auto model = resolved(R"(
thing T {
    property x : Double
    property out : Double
    data_analytics da1 {
        labels ON
        features x, out
        prediction_results out
        dataset "d.csv"
        automl ON
        sequential FALSE
        timestamps ON
        model_algorithm linear_regression lr
    }
    statechart init S { state S { } }
}
configuration C { instance t : T }
)");
    auto notes = apply_automl_defaults(model);
    const auto& da = model.things[0].analytics[0];
    REQUIRE(da.sequential.has_value());
    CHECK(!*da.sequential);                      // not overridden
    CHECK(da.scaler == ScalerKind::Unset);       // linear regression: no scaler default
    REQUIRE(notes.size() == 1);                  // only the engine note
    CHECK(notes[0].message.find("engine") != std::string::npos);
}

TEST_CASE("automl OFF passes the spec through untouched") {
    auto model = resolved(R"(
thing T {
    property x : Double
    property out : Boolean = false
    data_analytics da1 {
        labels OFF
        features x
        prediction_results out
        dataset "d.csv"
        automl OFF
        timestamps ON
        model_algorithm k_means km
    }
    statechart init S { state S { } }
}
configuration C { instance t : T }
)");
    CHECK(apply_automl_defaults(model).empty());
    const auto& da = model.things[0].analytics[0];
    CHECK(!da.sequential.has_value());
    CHECK(da.scaler == ScalerKind::Unset);
    CHECK(da.dalib.empty());
}
