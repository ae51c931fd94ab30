// The replay route: a stack machine over lowered instruction tables. This is
// the second, independent implementation of the behavior-program contract —
// it never touches the syntax tree, only the plan. Keeping it separate from
// the tree-walking interpreter is what makes trace equality between the two
// routes evidence rather than tautology.

#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mlq/plan.hpp"

namespace mlq::plan {

namespace {

class PlanProgram final : public rt::BehaviorProgram {
public:
    explicit PlanProgram(PlanThing thing) : t_(std::move(thing)) {}

    const std::string& thing_name() const override { return t_.name; }

    std::size_t property_count() const override { return t_.properties.size(); }
    const std::string& property_name(int slot) const override {
        return t_.properties[static_cast<std::size_t>(slot)].name;
    }
    ValueType property_type(int slot) const override {
        return t_.properties[static_cast<std::size_t>(slot)].type;
    }
    int property_index(const std::string& name) const override {
        for (std::size_t i = 0; i < t_.properties.size(); ++i)
            if (t_.properties[i].name == name) return static_cast<int>(i);
        return -1;
    }
    bool property_has_init(int slot) const override {
        return t_.properties[static_cast<std::size_t>(slot)].init_ip >= 0;
    }
    Value eval_property_init(int slot, rt::ExecSink& sink) const override {
        return exec(t_.properties[static_cast<std::size_t>(slot)].init_ip, sink, nullptr);
    }

    std::size_t port_count() const override { return t_.ports.size(); }
    const std::string& port_name(int port) const override {
        return t_.ports[static_cast<std::size_t>(port)];
    }
    int port_index(const std::string& name) const override {
        for (std::size_t i = 0; i < t_.ports.size(); ++i)
            if (t_.ports[i] == name) return static_cast<int>(i);
        return -1;
    }

    std::size_t message_count() const override { return t_.messages.size(); }
    const std::string& message_name(int message) const override {
        return t_.messages[static_cast<std::size_t>(message)].name;
    }
    int message_index(const std::string& name) const override {
        for (std::size_t i = 0; i < t_.messages.size(); ++i)
            if (t_.messages[i].name == name) return static_cast<int>(i);
        return -1;
    }
    const std::vector<ValueType>& message_param_types(int message) const override {
        return t_.messages[static_cast<std::size_t>(message)].param_types;
    }

    std::size_t analytics_count() const override { return t_.analytics.size(); }
    const DataAnalyticsSpec& analytics_spec(int da) const override {
        return t_.analytics[static_cast<std::size_t>(da)];
    }

    bool has_chart() const override { return t_.has_chart; }
    std::size_t state_count() const override { return t_.states.size(); }
    const std::string& state_name(int state) const override {
        return t_.states[static_cast<std::size_t>(state)].name;
    }
    bool state_is_final(int state) const override {
        return t_.states[static_cast<std::size_t>(state)].is_final;
    }
    int initial_state() const override { return static_cast<int>(t_.initial); }

    void run_chart_entry(rt::ExecSink& sink) const override {
        run(t_.chart_entry_ip, sink, nullptr);
    }
    void run_state_entry(int state, rt::ExecSink& sink) const override {
        run(t_.states[static_cast<std::size_t>(state)].entry_ip, sink, nullptr);
    }
    void run_state_exit(int state, rt::ExecSink& sink) const override {
        run(t_.states[static_cast<std::size_t>(state)].exit_ip, sink, nullptr);
    }

    int find_transition(int state, int port, int message) const override {
        if (state < 0 || port < 0 || message < 0) return -1;
        return static_cast<int>(t_.delta_at(state, port, message));
    }
    int eventless_transition(int state) const override {
        return static_cast<int>(t_.states[static_cast<std::size_t>(state)].eventless);
    }
    int transition_target(int transition) const override {
        return static_cast<int>(t_.transitions[static_cast<std::size_t>(transition)].target);
    }
    void run_transition_actions(int transition, rt::ExecSink& sink,
                                const rt::EventBinding* event) const override {
        run(t_.transitions[static_cast<std::size_t>(transition)].actions_ip, sink, event);
    }

private:
    void run(long long ip, rt::ExecSink& sink, const rt::EventBinding* event) const {
        if (ip >= 0) exec(ip, sink, event);
    }

    Value exec(long long start, rt::ExecSink& sink, const rt::EventBinding* event) const {
        const std::vector<Instr>& code = t_.code;
        std::vector<Value> st;
        auto pop = [&st]() -> Value {
            if (st.empty())
                throw std::runtime_error("corrupted plan: operand stack underflow");
            Value v = std::move(st.back());
            st.pop_back();
            return v;
        };
        auto pop_args = [&](long long n) {
            std::vector<Value> args(static_cast<std::size_t>(n));
            for (auto it = args.rbegin(); it != args.rend(); ++it) *it = pop();
            return args;
        };

        std::size_t ip = static_cast<std::size_t>(start);
        while (true) {
            if (ip >= code.size())
                throw std::runtime_error("corrupted plan: instruction pointer out of range");
            const Instr& in = code[ip];
            switch (in.op) {
            case Op::PushInt: st.push_back(Value::of_int(in.a)); break;
            case Op::PushNum: st.push_back(Value::of_double(in.num)); break;
            case Op::PushBool: st.push_back(Value::of_bool(in.a != 0)); break;
            case Op::PushStr: st.push_back(Value::of_string(in.text)); break;
            case Op::Load: st.push_back(sink.get_property(static_cast<int>(in.a))); break;
            case Op::Arg: {
                if (!event || !event->args)
                    throw std::runtime_error(
                        "corrupted plan: event argument outside a transition");
                st.push_back(event->args->at(static_cast<std::size_t>(in.a)));
                break;
            }
            case Op::Fail: throw EvalError(in.text);
            case Op::Neg: {
                Value x = pop();
                st.push_back(value_neg(x));
                break;
            }
            case Op::Not: {
                Value x = pop();
                st.push_back(Value::of_bool(!x.as_bool()));
                break;
            }
            case Op::Add: {
                Value b = pop(), a = pop();
                st.push_back(value_add(a, b));
                break;
            }
            case Op::Sub: {
                Value b = pop(), a = pop();
                st.push_back(value_sub(a, b));
                break;
            }
            case Op::Mul: {
                Value b = pop(), a = pop();
                st.push_back(value_mul(a, b));
                break;
            }
            case Op::Div: {
                Value b = pop(), a = pop();
                st.push_back(value_div(a, b));
                break;
            }
            case Op::Eq: {
                Value b = pop(), a = pop();
                st.push_back(Value::of_bool(value_eq(a, b)));
                break;
            }
            case Op::Ne: {
                Value b = pop(), a = pop();
                st.push_back(Value::of_bool(!value_eq(a, b)));
                break;
            }
            case Op::Lt: {
                Value b = pop(), a = pop();
                st.push_back(Value::of_bool(value_compare(a, b) < 0));
                break;
            }
            case Op::Le: {
                Value b = pop(), a = pop();
                st.push_back(Value::of_bool(value_compare(a, b) <= 0));
                break;
            }
            case Op::Gt: {
                Value b = pop(), a = pop();
                st.push_back(Value::of_bool(value_compare(a, b) > 0));
                break;
            }
            case Op::Ge: {
                Value b = pop(), a = pop();
                st.push_back(Value::of_bool(value_compare(a, b) >= 0));
                break;
            }
            case Op::AndThen: {
                Value x = pop();
                if (!x.as_bool()) {
                    st.push_back(Value::of_bool(false));
                    ip = static_cast<std::size_t>(in.a);
                    continue;
                }
                break;
            }
            case Op::OrElse: {
                Value x = pop();
                if (x.as_bool()) {
                    st.push_back(Value::of_bool(true));
                    ip = static_cast<std::size_t>(in.a);
                    continue;
                }
                break;
            }
            case Op::Print: {
                Value x = pop();
                sink.do_print(x);
                break;
            }
            case Op::Store: {
                Value x = pop();
                sink.set_property(static_cast<int>(in.a), x);
                break;
            }
            case Op::Send: {
                std::vector<Value> args = pop_args(in.c);
                sink.do_send(static_cast<int>(in.a), static_cast<int>(in.b), std::move(args));
                break;
            }
            case Op::Branch: {
                Value x = pop();
                ip = static_cast<std::size_t>(x.as_bool() ? in.a : in.b);
                continue;
            }
            case Op::Jump: ip = static_cast<std::size_t>(in.a); continue;
            case Op::DaPreprocess:
                sink.do_da(ast::DaActionKind::Preprocess, static_cast<int>(in.a), nullptr);
                break;
            case Op::DaTrain:
                sink.do_da(ast::DaActionKind::Train, static_cast<int>(in.a), nullptr);
                break;
            case Op::DaSave:
                sink.do_da(ast::DaActionKind::Save, static_cast<int>(in.a), nullptr);
                break;
            case Op::DaPredict: {
                std::vector<Value> args = pop_args(in.c);
                sink.do_da(ast::DaActionKind::Predict, static_cast<int>(in.a), &args);
                break;
            }
            case Op::End: return st.empty() ? Value{} : std::move(st.back());
            }
            ++ip;
        }
    }

    PlanThing t_;
};

} // namespace

rt::Network plan_network(const ExecutionPlan& plan, const rt::RunOptions& options) {
    std::vector<std::shared_ptr<const rt::BehaviorProgram>> programs;
    programs.reserve(plan.things.size());
    for (const PlanThing& t : plan.things) programs.push_back(std::make_shared<PlanProgram>(t));

    std::vector<std::pair<std::string, int>> instances;
    instances.reserve(plan.instances.size());
    for (const PlanInstance& inst : plan.instances)
        instances.emplace_back(inst.name, static_cast<int>(inst.thing));

    std::vector<ast::Annotation> annotations;
    annotations.reserve(plan.annotations.size());
    for (const PlanAnnotation& a : plan.annotations)
        annotations.push_back({a.key, a.value, {}});
    auto clocks = rt::parse_clocks(annotations, instances, programs);

    return rt::Network(std::move(programs), std::move(instances), plan.connectors,
                       std::move(clocks), options);
}

} // namespace mlq::plan
