#pragma once

#include <string>
#include <vector>

#include "mlq/ast.hpp"
#include "mlq/da_spec.hpp"
#include "mlq/value.hpp"

namespace mlq::rt {

// Event-parameter binding in force while a transition's action block runs.
// The statechart interpreter resolves parameters by name through `message`;
// the plan executor has compiled them to positions and reads `args` directly.
struct EventBinding {
    const std::string* var = nullptr;        // the clause's event variable
    const ast::Message* message = nullptr;   // declaration, for name lookup
    const std::vector<Value>* args = nullptr;
};

// Services an executing action block calls back into. The network implements
// this once; both behavior representations drive it, which keeps scheduling,
// tracing, and DA dispatch identical by construction while the action and
// expression semantics stay independently implemented.
class ExecSink {
public:
    virtual ~ExecSink() = default;

    virtual Value get_property(int slot) const = 0;
    // Coerces to the slot's declared type and emits an assign event.
    virtual void set_property(int slot, const Value& v) = 0;
    virtual void do_print(const Value& v) = 0;
    virtual void do_send(int port, int message, std::vector<Value> args) = 0;
    // args is non-null only for da_predict.
    virtual void do_da(ast::DaActionKind kind, int da, const std::vector<Value>* args) = 0;
};

// One thing's executable behavior. Implemented twice on purpose: once walking
// the resolved syntax tree (the interpreter) and once running lowered
// instruction tables (the replayed plan). The network cannot tell them apart.
class BehaviorProgram {
public:
    virtual ~BehaviorProgram() = default;

    virtual const std::string& thing_name() const = 0;

    // properties (slots in declaration order)
    virtual std::size_t property_count() const = 0;
    virtual const std::string& property_name(int slot) const = 0;
    virtual ValueType property_type(int slot) const = 0;
    virtual int property_index(const std::string& name) const = 0; // -1 when absent
    virtual bool property_has_init(int slot) const = 0;
    virtual Value eval_property_init(int slot, ExecSink& sink) const = 0;

    // ports and messages (declaration order)
    virtual std::size_t port_count() const = 0;
    virtual const std::string& port_name(int port) const = 0;
    virtual int port_index(const std::string& name) const = 0;
    virtual std::size_t message_count() const = 0;
    virtual const std::string& message_name(int message) const = 0;
    virtual int message_index(const std::string& name) const = 0;
    virtual const std::vector<ValueType>& message_param_types(int message) const = 0;

    // embedded analytics components
    virtual std::size_t analytics_count() const = 0;
    virtual const DataAnalyticsSpec& analytics_spec(int da) const = 0;

    // the statechart
    virtual bool has_chart() const = 0;
    virtual std::size_t state_count() const = 0;
    virtual const std::string& state_name(int state) const = 0;
    virtual bool state_is_final(int state) const = 0;
    virtual int initial_state() const = 0;
    virtual void run_chart_entry(ExecSink& sink) const = 0;
    virtual void run_state_entry(int state, ExecSink& sink) const = 0;
    virtual void run_state_exit(int state, ExecSink& sink) const = 0;

    // Transition handles are implementation-private indices. find_transition
    // realizes δ(state, event); eventless_transition reports the one enabled
    // completion transition, -1 when the state has none.
    virtual int find_transition(int state, int port, int message) const = 0;
    virtual int eventless_transition(int state) const = 0;
    virtual int transition_target(int transition) const = 0;
    virtual void run_transition_actions(int transition, ExecSink& sink,
                                        const EventBinding* event) const = 0;
};

} // namespace mlq::rt
