#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <string>
#include <vector>

#include "mlq/parser.hpp"
#include "mlq/plan.hpp"
#include "mlq/resolve.hpp"
#include "mlq/rng.hpp"
#include "mlq/runtime.hpp"
#include "mlq/validate.hpp"
#include "support/scratch.hpp"

using namespace mlq;
using namespace mlq::plan;
using testsupport::scratch_dir;
using testsupport::spit;

namespace {

ResolvedModel pipeline(const std::string& src) {
    auto parsed = parse_model(src);
    REQUIRE(parsed.ok());
    auto r = resolve(parsed.model);
    REQUIRE(r.ok());
    apply_automl_defaults(r.model);
    REQUIRE(!has_errors(check_valid(r.model)));
    REQUIRE(!has_errors(check_complete(r.model)));
    return std::move(r.model);
}

std::string interp_trace(const ResolvedModel& model, rt::RunOptions opts) {
    rt::Network net = rt::interpret_network(model, "", opts);
    net.run();
    return net.trace_text();
}

// the whole artifact loop: lower, serialize, reload, replay
std::string replay_trace(const ResolvedModel& model, rt::RunOptions opts) {
    ExecutionPlan lowered = lower_configuration(model, 0);
    ExecutionPlan loaded = load_plan(serialize_plan(lowered));
    rt::Network net = plan_network(loaded, opts);
    net.run();
    return net.trace_text();
}

void check_equivalent(const std::string& src, rt::RunOptions opts = {}) {
    auto model = pipeline(src);
    std::string a = interp_trace(model, opts);
    std::string b = replay_trace(model, opts);
    CHECK(a == b);
    CHECK(!a.empty());
}

const char* kServer4 = R"(
thing Server4 {
    message query(code : Int32)
    message ack()
    provided port p {
        receives query
        sends ack
    }
    property code : Int32 = 0
    statechart init Boot {
        state Boot {
            transition -> Loading
        }
        state Loading {
            transition -> Training
        }
        state Training {
            transition -> Ready
        }
        state Ready {
            transition -> Ready event m : p?query action do
                code = m.code
                p!ack()
            end
        }
    }
}
configuration C {
    instance s : Server4
}
)";

} // namespace

TEST_CASE("lowering a four-state server: dense table with one eventful cell") {
    auto model = pipeline(kServer4);
    PlanThing t = lower_thing(model.things[0]);

    REQUIRE(t.states.size() == 4);
    REQUIRE(t.ports.size() == 1);
    REQUIRE(t.messages.size() == 2);
    REQUIRE(t.transitions.size() == 4);

    // 4 states x 1 port x 2 messages
    REQUIRE(t.delta.size() == 8);
    std::size_t filled = 0;
    for (long long cell : t.delta) filled += cell != -1;
    CHECK(filled == 1);
    // the one reaction: Ready (state 3) x p?query (port 0, message 0) -> its own transition
    CHECK(t.delta_at(3, 0, 0) == 3);

    // the three settling transitions hang off their states, in declaration order
    CHECK(t.states[0].eventless == 0);
    CHECK(t.states[1].eventless == 1);
    CHECK(t.states[2].eventless == 2);
    CHECK(t.states[3].eventless == -1);

    CHECK(t.initial == 0);
    CHECK(t.transitions[0].target == 1);
    CHECK(t.transitions[3].target == 3);
    // the eventless transitions carry no actions; the eventful one does
    CHECK(t.transitions[0].actions_ip == -1);
    CHECK(t.transitions[3].actions_ip >= 0);
}

TEST_CASE("lowering an inert chart: all-no-transition table") {
    auto model = pipeline(R"(
thing Inert {
    message ping()
    provided port p {
        receives ping
    }
    statechart init Only {
        state Only { }
    }
}
configuration C {
    instance i : Inert
}
)");
    PlanThing t = lower_thing(model.things[0]);
    REQUIRE(t.delta.size() == 1);
    CHECK(t.delta[0] == -1);
    CHECK(t.states[0].eventless == -1);
    CHECK(t.states[0].entry_ip == -1);
    CHECK(t.code.empty());
}

TEST_CASE("an if/else lowers to one branch instruction with two target offsets") {
    auto model = pipeline(R"(
thing Chooser {
    message go()
    provided port p {
        receives go
    }
    property prediction : Boolean = false
    property picked : Int32 = 0
    statechart init S {
        state S {
            transition -> S event m : p?go action do
                if (prediction == false) picked = 1 else picked = 2
            end
        }
    }
}
configuration C {
    instance c : Chooser
}
)");
    PlanThing t = lower_thing(model.things[0]);
    std::vector<std::size_t> branches;
    for (std::size_t i = 0; i < t.code.size(); ++i)
        if (t.code[i].op == Op::Branch) branches.push_back(i);
    REQUIRE(branches.size() == 1);

    const Instr& br = t.code[branches[0]];
    CHECK(br.a != br.b); // distinct then/else entry points
    CHECK(br.a > static_cast<long long>(branches[0]));
    CHECK(br.b > static_cast<long long>(branches[0]));
    // both arms store into the same slot and converge on the end of the block
    CHECK(t.code[static_cast<std::size_t>(br.b) - 1].op == Op::Jump);
}

TEST_CASE("plan text round-trips byte for byte") {
    auto model = pipeline(kServer4);
    ExecutionPlan p = lower_configuration(model, 0);
    std::string text = serialize_plan(p);
    CHECK(text.rfind("MLQPLAN/1\n", 0) == 0);

    ExecutionPlan loaded = load_plan(text);
    CHECK(serialize_plan(loaded) == text);

    // lowering is canonical: same model, same bytes
    CHECK(serialize_plan(lower_configuration(model, 0)) == text);
}

TEST_CASE("loading rejects version mismatches and non-plans") {
    CHECK_THROWS_WITH_AS(load_plan("MLQPLAN/2\nconfig X\n"),
                         doctest::Contains("unsupported plan version"), PlanError);
    CHECK_THROWS_WITH_AS(load_plan("hello world\n"),
                         doctest::Contains("expected 'MLQPLAN/1'"), PlanError);
    CHECK_THROWS_WITH_AS(load_plan(""), doctest::Contains("expected 'MLQPLAN/1'"), PlanError);
}

TEST_CASE("loading rejects truncated documents") {
    auto model = pipeline(kServer4);
    std::string text = serialize_plan(lower_configuration(model, 0));

    // drop the final line
    std::string cut = text.substr(0, text.rfind('\n', text.size() - 2) + 1);
    CHECK_THROWS_AS(load_plan(cut), PlanError);

    // drop everything past the midpoint (at a line boundary)
    std::string half = text.substr(0, text.find('\n', text.size() / 2) + 1);
    CHECK_THROWS_AS(load_plan(half), PlanError);
}

TEST_CASE("loading rejects out-of-range table indices") {
    auto model = pipeline(kServer4);
    std::string text = serialize_plan(lower_configuration(model, 0));

    auto swap_line = [&](const std::string& from, const std::string& to) {
        std::string copy = text;
        std::size_t at = copy.find(from);
        REQUIRE(at != std::string::npos);
        copy.replace(at, from.size(), to);
        return copy;
    };

    CHECK_THROWS_WITH_AS(load_plan(swap_line("\ninitial 0\n", "\ninitial 7\n")),
                         doctest::Contains("out of range"), PlanError);
    CHECK_THROWS_WITH_AS(load_plan(swap_line("\ntransition 0 1 -1\n", "\ntransition 0 9 -1\n")),
                         doctest::Contains("out of range"), PlanError);
    CHECK_THROWS_WITH_AS(load_plan(swap_line("\ninstance 0 s 0\n", "\ninstance 0 s 3\n")),
                         doctest::Contains("out of range"), PlanError);
}

TEST_CASE("replayed plans match the interpreter: messaging") {
    check_equivalent(R"(
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
)");
}

TEST_CASE("replayed plans match the interpreter: event parameters and prints") {
    check_equivalent(R"(
thing Sender {
    message report(temp : Double, room : String, urgent : Boolean)
    required port out {
        sends report
    }
    statechart init S {
        state S {
            on entry out!report(21.5, "kitchen", true)
        }
    }
}
thing Receiver {
    message report(temp : Double, room : String, urgent : Boolean)
    provided port in {
        receives report
    }
    property last_temp : Double = 0.0
    property last_room : String = ""
    property flagged : Boolean = false
    statechart init Idle {
        state Idle {
            transition -> Idle event m : in?report action do
                last_temp = m.temp
                last_room = m.room
                flagged = m.urgent
                print m.room + " logged"
            end
        }
    }
}
configuration C {
    instance a : Sender
    instance b : Receiver
    connector a.out => b.in
}
)");
}

TEST_CASE("replayed plans match the interpreter: faults and short-circuits") {
    // the guarded division never runs; the unguarded one faults identically
    check_equivalent(R"(
thing Guard {
    property b : Int32 = 0
    property safe : Boolean = false
    property c : Int32 = 0
    statechart init S {
        state S {
            on entry do
                safe = b == 0 or 10 / b > 1
                print "guarded fine"
                c = 10 / b
                print "unreachable"
            end
        }
    }
}
configuration C {
    instance g : Guard
}
)");
}

TEST_CASE("replayed plans match the interpreter: clocks and final states") {
    rt::RunOptions opts;
    opts.max_steps = 12;
    check_equivalent(R"(
thing Meter {
    message tick()
    provided port timer {
        receives tick
    }
    property ticks : Int32 = 0
    statechart init S {
        state S {
            transition -> Done event m : timer?tick action ticks = ticks + 1
        }
        final state Done {
            on entry print "done"
        }
    }
}
configuration Timed @clock "m.timer tick 3" {
    instance m : Meter
}
)",
                     opts);
}

TEST_CASE("replayed plans match the interpreter: analytics round trip") {
    auto stage = [](const char* tag) {
        auto dir = scratch_dir(tag);
        Rng rng(10);
        std::string csv;
        for (int i = 0; i < 200; ++i) {
            long long code = static_cast<long long>(rng.index(1000));
            csv += render_int(code) + (code > 500 ? ",true" : ",false") + "\n";
        }
        spit(dir / "gate.csv", csv);
        return dir;
    };

    const char* src = R"(
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
    property hot : Boolean = false
    property cold : Boolean = false
    statechart init Ask {
        state Ask {
            on entry do
                p!query(900)
                p!query(100)
            end
            transition -> Wait event a : p?yes action hot = true
        }
        state Wait {
            transition -> Done event b : p?no action cold = true
        }
        final state Done { }
    }
}
configuration C {
    instance g : Gate
    instance probe : Probe
    connector probe.p => g.p
}
)";

    auto model = pipeline(src);

    // each route gets its own staged copy of the same dataset bytes, so file
    // writes (model document, training log) cannot couple the runs
    rt::RunOptions interp_opts;
    interp_opts.dataset_root = stage("plan_gate_interp").string();
    rt::RunOptions replay_opts;
    replay_opts.dataset_root = stage("plan_gate_replay").string();

    std::string a = interp_trace(model, interp_opts);
    std::string b = replay_trace(model, replay_opts);
    CHECK(a == b);
    CHECK(a.find("da-train") != std::string::npos);
    CHECK(a.find("da1(900) -> true") != std::string::npos);
}

TEST_CASE("plan completeness: everything in the model shows up in the tables") {
    auto model = pipeline(kServer4);
    const ResolvedThing& thing = model.things[0];
    PlanThing t = lower_thing(thing);

    REQUIRE(t.properties.size() == thing.properties.size());
    for (std::size_t i = 0; i < thing.properties.size(); ++i)
        CHECK(t.properties[i].name == thing.properties[i].name);
    REQUIRE(t.states.size() == thing.chart->states.size());
    for (std::size_t i = 0; i < t.states.size(); ++i)
        CHECK(t.states[i].name == thing.chart->states[i].name);
    REQUIRE(t.messages.size() == thing.messages.size());
    for (std::size_t i = 0; i < t.messages.size(); ++i)
        CHECK(t.messages[i].name == thing.messages[i].name);
    REQUIRE(t.ports.size() == thing.ports.size());
    CHECK(t.analytics.size() == thing.analytics.size());
}

TEST_CASE("compile emits one plan per configuration plus a digest manifest") {
    auto model = pipeline(R"(
thing Worker {
    statechart init Idle {
        state Idle { }
    }
}
configuration First {
    instance w : Worker
}
configuration Second {
    instance w : Worker
}
)");
    CompileResult res = compile(model);
    REQUIRE(res.ok());
    REQUIRE(res.artifacts.size() == 3);
    CHECK(res.artifacts[0].path == "First.mlqplan");
    CHECK(res.artifacts[1].path == "Second.mlqplan");
    CHECK(res.artifacts[2].path == "manifest.txt");

    const std::string& manifest = res.artifacts[2].content;
    CHECK(manifest.rfind("MLQMANIFEST/1\n", 0) == 0);
    for (int i = 0; i < 2; ++i) {
        std::string expect = "plan " + res.artifacts[i].path + " fnv1a64 " +
                             content_digest(res.artifacts[i].content) + " bytes " +
                             std::to_string(res.artifacts[i].content.size()) + "\n";
        CHECK(manifest.find(expect) != std::string::npos);
    }

    // determinism: a second compile is byte-identical
    CompileResult again = compile(model);
    REQUIRE(again.artifacts.size() == res.artifacts.size());
    for (std::size_t i = 0; i < res.artifacts.size(); ++i)
        CHECK(again.artifacts[i].content == res.artifacts[i].content);

    // every emitted plan loads cleanly
    for (int i = 0; i < 2; ++i) CHECK_NOTHROW(load_plan(res.artifacts[i].content));
}

TEST_CASE("compile re-runs validation and refuses broken models") {
    // missing dataset path: a completeness error (C2)
    auto parsed = parse_model(R"(
thing T {
    property x : Int32 = 0
    property y : Boolean = false
    data_analytics da1 {
        labels ON
        features x, y
        prediction_results y
        automl OFF
        sequential TRUE
        model_algorithm decision_tree_classifier m (seed 10)
    }
    statechart init S {
        state S { }
    }
}
configuration C {
    instance t : T
}
)");
    REQUIRE(parsed.ok());
    auto r = resolve(parsed.model);
    REQUIRE(r.ok());
    apply_automl_defaults(r.model);

    auto direct = check_complete(r.model);
    REQUIRE(has_errors(direct));

    CompileResult res = compile(r.model);
    CHECK_FALSE(res.ok());
    CHECK(res.artifacts.empty());
    // the same diagnostic surfaces through compile
    bool found = false;
    for (const auto& d : res.diagnostics)
        found = found || (d.code == "C2" && d.message.find("dataset") != std::string::npos);
    CHECK(found);
}

TEST_CASE("compile rejects unknown backends by name") {
    auto model = pipeline(kServer4);
    CompileResult res = compile(model, "java");
    CHECK_FALSE(res.ok());
    REQUIRE(res.diagnostics.size() == 1);
    CHECK(res.diagnostics[0].code == "G001");
    CHECK(res.diagnostics[0].message == "unknown backend 'java'");
    CHECK(backend_names() == std::vector<std::string>{"plan"});
    CHECK(find_backend("plan") != nullptr);
    CHECK(find_backend("plan")->name() == "plan");
}

TEST_CASE("annotations survive lowering as uninterpreted key/value pairs") {
    auto model = pipeline(R"(
thing Device @datatype_mapping "integer=short" {
    statechart init S {
        state S { }
    }
}
configuration C @mqtt_broker "tcp://localhost:1883" {
    instance d : Device
}
)");
    ExecutionPlan p = lower_configuration(model, 0);
    REQUIRE(p.things[0].annotations.size() == 1);
    CHECK(p.things[0].annotations[0].key == "datatype_mapping");
    CHECK(p.things[0].annotations[0].value == "integer=short");
    REQUIRE(p.annotations.size() == 1);
    CHECK(p.annotations[0].key == "mqtt_broker");
    CHECK(p.annotations[0].value == "tcp://localhost:1883");

    // and they round-trip through the text form
    ExecutionPlan loaded = load_plan(serialize_plan(p));
    CHECK(loaded.annotations[0].value == "tcp://localhost:1883");
    CHECK(loaded.things[0].annotations[0].value == "integer=short");
}
