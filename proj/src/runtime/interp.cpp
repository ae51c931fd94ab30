// The statechart interpreter: executes a thing's behavior by walking the
// resolved syntax tree directly. The replayed-plan executor implements the
// same BehaviorProgram surface from lowered tables; agreement between the two
// is what the equivalence suite checks, so nothing here may share action or
// expression evaluation code with the plan route.
#include <string>
#include <unordered_map>
#include <vector>

#include "mlq/runtime.hpp"

namespace mlq::rt {

namespace {

struct InterpProgram final : BehaviorProgram {
    const ResolvedThing& thing;
    std::vector<std::vector<ValueType>> message_param_types_;
    // flattened transitions: per chart state, in declaration order
    struct Trans {
        int state = -1;
        const ast::Transition* decl = nullptr;
        int target = -1;
        int event_port = -1;    // -1 for eventless
        int event_message = -1; // message index within this thing
    };
    std::vector<Trans> transitions_;
    std::vector<std::vector<int>> by_state_; // state -> transition handles

    explicit InterpProgram(const ResolvedThing& t) : thing(t) {
        for (const auto& m : t.messages) {
            std::vector<ValueType> types;
            for (const auto& p : m.params)
                types.push_back(type_from_name(p.type).value_or(ValueType::Int32));
            message_param_types_.push_back(std::move(types));
        }
        if (!t.chart) return;
        by_state_.resize(t.chart->states.size());
        for (std::size_t s = 0; s < t.chart->states.size(); ++s) {
            for (const auto& tr : t.chart->states[s].transitions) {
                Trans trans;
                trans.state = static_cast<int>(s);
                trans.decl = &tr;
                trans.target = t.state_index(tr.target);
                if (tr.event) {
                    trans.event_port = t.port_index(tr.event->port);
                    trans.event_message = t.message_index(tr.event->message);
                }
                by_state_[s].push_back(static_cast<int>(transitions_.size()));
                transitions_.push_back(trans);
            }
        }
    }

    const std::string& thing_name() const override { return thing.name; }

    std::size_t property_count() const override { return thing.properties.size(); }
    const std::string& property_name(int slot) const override {
        return thing.properties[slot].name;
    }
    ValueType property_type(int slot) const override { return thing.property_type(slot); }
    int property_index(const std::string& name) const override {
        return thing.property_index(name);
    }
    bool property_has_init(int slot) const override {
        return thing.properties[slot].init.has_value();
    }
    Value eval_property_init(int slot, ExecSink& sink) const override {
        return eval(*thing.properties[slot].init, sink, nullptr);
    }

    std::size_t port_count() const override { return thing.ports.size(); }
    const std::string& port_name(int port) const override { return thing.ports[port].name; }
    int port_index(const std::string& name) const override { return thing.port_index(name); }
    std::size_t message_count() const override { return thing.messages.size(); }
    const std::string& message_name(int message) const override {
        return thing.messages[message].name;
    }
    int message_index(const std::string& name) const override {
        return thing.message_index(name);
    }
    const std::vector<ValueType>& message_param_types(int message) const override {
        return message_param_types_[message];
    }

    std::size_t analytics_count() const override { return thing.analytics.size(); }
    const DataAnalyticsSpec& analytics_spec(int da) const override {
        return thing.analytics[da];
    }

    bool has_chart() const override { return thing.chart.has_value(); }
    std::size_t state_count() const override {
        return thing.chart ? thing.chart->states.size() : 0;
    }
    const std::string& state_name(int state) const override {
        return thing.chart->states[state].name;
    }
    bool state_is_final(int state) const override {
        return thing.chart->states[state].is_final;
    }
    int initial_state() const override { return thing.state_index(thing.chart->initial); }

    void run_chart_entry(ExecSink& sink) const override {
        exec_block(thing.chart->on_entry, sink, nullptr);
    }
    void run_state_entry(int state, ExecSink& sink) const override {
        exec_block(thing.chart->states[state].on_entry, sink, nullptr);
    }
    void run_state_exit(int state, ExecSink& sink) const override {
        exec_block(thing.chart->states[state].on_exit, sink, nullptr);
    }

    int find_transition(int state, int port, int message) const override {
        for (int handle : by_state_[state]) {
            const Trans& t = transitions_[handle];
            if (t.event_port == port && t.event_message == message) return handle;
        }
        return -1;
    }

    int eventless_transition(int state) const override {
        for (int handle : by_state_[state])
            if (transitions_[handle].event_port < 0) return handle;
        return -1;
    }

    int transition_target(int transition) const override {
        return transitions_[transition].target;
    }

    void run_transition_actions(int transition, ExecSink& sink,
                                const EventBinding* event) const override {
        const Trans& t = transitions_[transition];
        EventBinding bound;
        if (event && t.decl->event) {
            bound = *event;
            bound.var = &t.decl->event->var;
            bound.message = &thing.messages[t.event_message];
        }
        exec_block(t.decl->actions, sink, event && t.decl->event ? &bound : nullptr);
    }

    // ---- the tree-walking core -------------------------------------------

    void exec_block(const std::vector<ast::Action>& actions, ExecSink& sink,
                    const EventBinding* ev) const {
        for (const auto& a : actions) exec_action(a, sink, ev);
    }

    void exec_action(const ast::Action& a, ExecSink& sink, const EventBinding* ev) const {
        if (const auto* pr = std::get_if<ast::PrintAction>(&a.node)) {
            sink.do_print(eval(*pr->value, sink, ev));
        } else if (const auto* as = std::get_if<ast::AssignAction>(&a.node)) {
            sink.set_property(thing.property_index(as->property), eval(*as->value, sink, ev));
        } else if (const auto* se = std::get_if<ast::SendAction>(&a.node)) {
            std::vector<Value> args;
            args.reserve(se->args.size());
            for (const auto& e : se->args) args.push_back(eval(*e, sink, ev));
            sink.do_send(thing.port_index(se->port), thing.message_index(se->message),
                         std::move(args));
        } else if (const auto* iff = std::get_if<ast::IfAction>(&a.node)) {
            if (eval(*iff->condition, sink, ev).as_bool())
                exec_block(iff->then_actions, sink, ev);
            else
                exec_block(iff->else_actions, sink, ev);
        } else if (const auto* da = std::get_if<ast::DaAction>(&a.node)) {
            if (da->kind == ast::DaActionKind::Predict) {
                std::vector<Value> args;
                args.reserve(da->args.size());
                for (const auto& e : da->args) args.push_back(eval(*e, sink, ev));
                sink.do_da(da->kind, thing.analytics_index(da->da), &args);
            } else {
                sink.do_da(da->kind, thing.analytics_index(da->da), nullptr);
            }
        }
    }

    Value eval(const ast::Expr& e, ExecSink& sink, const EventBinding* ev) const {
        if (const auto* i = std::get_if<ast::IntLit>(&e.node)) return Value::of_int(i->value);
        if (const auto* f = std::get_if<ast::FloatLit>(&e.node)) return Value::of_double(f->value);
        if (const auto* s = std::get_if<ast::StringLit>(&e.node)) return Value::of_string(s->value);
        if (const auto* b = std::get_if<ast::BoolLit>(&e.node)) return Value::of_bool(b->value);
        if (const auto* n = std::get_if<ast::NameRef>(&e.node))
            return sink.get_property(thing.property_index(n->name));
        if (const auto* p = std::get_if<ast::ParamRef>(&e.node)) {
            if (!ev || !ev->var || p->var != *ev->var)
                throw EvalError("event variable '" + p->var + "' is not bound here");
            for (std::size_t i = 0; i < ev->message->params.size(); ++i)
                if (ev->message->params[i].name == p->param) return (*ev->args)[i];
            throw EvalError("message " + ev->message->name + " has no parameter '" + p->param +
                            "'");
        }
        if (const auto* u = std::get_if<ast::Unary>(&e.node)) {
            Value x = eval(*u->operand, sink, ev);
            return u->op == ast::UnaryOp::Neg ? value_neg(x) : Value::of_bool(!x.as_bool());
        }
        const auto& b = std::get<ast::Binary>(e.node);
        // && and || short-circuit: the right side must not be evaluated (its
        // evaluation could fault) when the left side decides
        if (b.op == ast::BinaryOp::And) {
            Value lhs = eval(*b.lhs, sink, ev);
            if (!lhs.as_bool()) return Value::of_bool(false);
            return Value::of_bool(eval(*b.rhs, sink, ev).as_bool());
        }
        if (b.op == ast::BinaryOp::Or) {
            Value lhs = eval(*b.lhs, sink, ev);
            if (lhs.as_bool()) return Value::of_bool(true);
            return Value::of_bool(eval(*b.rhs, sink, ev).as_bool());
        }
        Value lhs = eval(*b.lhs, sink, ev);
        Value rhs = eval(*b.rhs, sink, ev);
        switch (b.op) {
        case ast::BinaryOp::Add: return value_add(lhs, rhs);
        case ast::BinaryOp::Sub: return value_sub(lhs, rhs);
        case ast::BinaryOp::Mul: return value_mul(lhs, rhs);
        case ast::BinaryOp::Div: return value_div(lhs, rhs);
        case ast::BinaryOp::Eq: return Value::of_bool(value_eq(lhs, rhs));
        case ast::BinaryOp::Ne: return Value::of_bool(!value_eq(lhs, rhs));
        case ast::BinaryOp::Lt: return Value::of_bool(value_compare(lhs, rhs) < 0);
        case ast::BinaryOp::Le: return Value::of_bool(value_compare(lhs, rhs) <= 0);
        case ast::BinaryOp::Gt: return Value::of_bool(value_compare(lhs, rhs) > 0);
        case ast::BinaryOp::Ge: return Value::of_bool(value_compare(lhs, rhs) >= 0);
        default: break;
        }
        throw EvalError("unreachable operator");
    }
};

} // namespace

Network interpret_network(const ResolvedModel& model, const std::string& config,
                          const RunOptions& options) {
    int ci = -1;
    if (config.empty()) {
        if (model.configurations.size() != 1)
            throw RunError(model.configurations.empty()
                               ? "model has no configuration"
                               : "model has several configurations; name one");
        ci = 0;
    } else {
        ci = model.configuration_index(config);
        if (ci < 0) throw RunError("unknown configuration '" + config + "'");
    }
    const ResolvedConfiguration& cfg = model.configurations[ci];

    std::vector<std::shared_ptr<const BehaviorProgram>> programs;
    std::vector<int> thing_to_program(model.things.size(), -1);
    std::vector<std::pair<std::string, int>> instances;
    for (const auto& inst : cfg.instances) {
        if (thing_to_program[inst.thing] < 0) {
            thing_to_program[inst.thing] = static_cast<int>(programs.size());
            programs.push_back(std::make_shared<InterpProgram>(model.things[inst.thing]));
        }
        instances.emplace_back(inst.name, thing_to_program[inst.thing]);
    }

    std::vector<ClockSpec> clocks = parse_clocks(cfg.annotations, instances, programs);
    return Network(std::move(programs), std::move(instances), cfg.connectors, std::move(clocks),
                   options);
}

} // namespace mlq::rt
