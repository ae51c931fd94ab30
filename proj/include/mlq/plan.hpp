#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlq/da_spec.hpp"
#include "mlq/diag.hpp"
#include "mlq/resolved.hpp"
#include "mlq/runtime.hpp"

namespace mlq::plan {

// A structurally broken plan document: wrong magic line, malformed or missing
// record, table index out of range, or truncation.
struct PlanError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// --- the instruction set ------------------------------------------------------
//
// One flat array per thing; expressions are postfix over an operand stack and
// actions are interleaved in the same stream. Every fragment (property
// initializer, chart entry, state entry/exit, transition actions) is a range
// starting at a recorded ip and ending at an End instruction. Branch targets
// are absolute indices into the same array.
enum class Op : std::uint8_t {
    PushInt,   // a = integer literal
    PushNum,   // num = floating literal
    PushBool,  // a = 0|1
    PushStr,   // text = string literal
    Load,      // a = property slot; push its value
    Arg,       // a = event argument position; push it
    Fail,      // text = message; raise an evaluation error
    Neg,
    Not,
    Add,
    Sub,
    Mul,
    Div,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    AndThen,  // a = join ip; pop, and if false push false and jump (skips rhs)
    OrElse,   // a = join ip; pop, and if true push true and jump (skips rhs)
    Print,    // pop and print
    Store,    // a = property slot; pop into it
    Send,     // a = port, b = message (sender numbering), c = argc; pop args
    Branch,   // pop condition; jump to a when true, to b when false
    Jump,     // a = target ip
    DaPreprocess,  // a = analytics index
    DaTrain,       // a = analytics index
    DaSave,        // a = analytics index
    DaPredict,     // a = analytics index, c = argc; pop args
    End,           // end of fragment; an initializer leaves its value on top
};

const char* op_name(Op op);

struct Instr {
    Op op = Op::End;
    long long a = 0;
    long long b = 0;
    long long c = 0;
    double num = 0.0;
    std::string text;

    bool operator==(const Instr&) const = default;
};

// --- lowered model tables -----------------------------------------------------

// Annotations survive lowering as plain key/value pairs (source positions do
// not belong in a canonical artifact). The plan backend records them unused;
// source-emitting backends may interpret them.
struct PlanAnnotation {
    std::string key;
    std::string value;

    bool operator==(const PlanAnnotation&) const = default;
};

struct PlanMessage {
    std::string name;
    std::vector<ValueType> param_types;

    bool operator==(const PlanMessage&) const = default;
};

struct PlanProperty {
    std::string name;
    ValueType type = ValueType::Int32;
    long long init_ip = -1; // -1: default-initialized

    bool operator==(const PlanProperty&) const = default;
};

struct PlanState {
    std::string name;
    bool is_final = false;
    long long entry_ip = -1;
    long long exit_ip = -1;
    long long eventless = -1; // transition taken when the state settles

    bool operator==(const PlanState&) const = default;
};

struct PlanTransition {
    long long target = -1;
    long long actions_ip = -1;

    bool operator==(const PlanTransition&) const = default;
};

struct PlanThing {
    std::string name;
    std::vector<PlanAnnotation> annotations;
    std::vector<std::string> ports;
    std::vector<PlanMessage> messages;
    std::vector<PlanProperty> properties;
    std::vector<DataAnalyticsSpec> analytics;

    bool has_chart = false;
    long long initial = -1;
    long long chart_entry_ip = -1;
    std::vector<PlanState> states;
    std::vector<PlanTransition> transitions;
    // dense delta: [state][port][message] -> transition index or -1,
    // row-major over states, then ports, then messages
    std::vector<long long> delta;

    std::vector<Instr> code;

    long long delta_at(long long state, long long port, long long message) const {
        return delta[static_cast<std::size_t>(
            (state * static_cast<long long>(ports.size()) + port) *
                static_cast<long long>(messages.size()) +
            message)];
    }
};

struct PlanInstance {
    std::string name;
    long long thing = -1;

    bool operator==(const PlanInstance&) const = default;
};

// One configuration, lowered to a self-contained, replayable artifact: the
// simulator can run it with no reference back to the model it came from.
struct ExecutionPlan {
    std::string config;
    std::vector<PlanAnnotation> model_annotations; // file-level, preserved unused
    std::vector<PlanAnnotation> annotations;       // the configuration's own
    std::vector<PlanThing> things;
    std::vector<PlanInstance> instances;
    std::vector<ResolvedConnector> connectors;
};

// --- lowering, serialization, replay -------------------------------------------

// Lowers one thing: declaration-order state/event numbering, dense delta
// table, action blocks flattened to instructions. Input must have passed both
// validation predicates.
PlanThing lower_thing(const ResolvedThing& thing);

// Lowers one configuration of a validated model.
ExecutionPlan lower_configuration(const ResolvedModel& model, int config);

// Canonical text form (magic line "MLQPLAN/1"). serialize(load(p)) == p.
std::string serialize_plan(const ExecutionPlan& plan);
ExecutionPlan load_plan(const std::string& text); // throws PlanError

// FNV-1a 64-bit content digest, 16 hex digits; used by the compile manifest.
std::string content_digest(std::string_view bytes);

// Assembles the replay route: table-driven programs over the shared network
// scheduler. The plan carries everything needed; the model is not consulted.
rt::Network plan_network(const ExecutionPlan& plan, const rt::RunOptions& options);

// --- backends -------------------------------------------------------------------

struct Artifact {
    std::string path; // relative, e.g. "PingPong.mlqplan"
    std::string content;
};

// A code-generation target. Backends never mutate the model; annotation keys
// a backend does not understand must be preserved in its artifacts or listed
// as ignored in its notes.
class Backend {
public:
    virtual ~Backend() = default;
    virtual const std::string& name() const = 0;
    virtual std::vector<Artifact> emit(const ResolvedModel& model) const = 0;
};

const Backend* find_backend(const std::string& name); // nullptr when unknown
std::vector<std::string> backend_names();

struct CompileResult {
    std::vector<Artifact> artifacts;
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return !has_errors(diagnostics); }
};

// Re-runs both validation predicates, then hands the model to the named
// backend. The reference backend "plan" emits one .mlqplan per configuration
// plus "manifest.txt" with content digests. Pure: equal models give
// byte-identical artifacts.
CompileResult compile(const ResolvedModel& model, const std::string& backend = "plan");

} // namespace mlq::plan
