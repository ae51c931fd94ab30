#include "mlq/runtime.hpp"

#include <algorithm>

namespace mlq::rt {

namespace {

constexpr int kLivelockLimit = 10000;

std::string join_args(const std::vector<Value>& args) {
    std::string out;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (i) out += ',';
        out += args[i].render();
    }
    return out;
}

} // namespace

// The per-instance execution context handed to behavior programs. All side
// effects of an action block flow through here, so both program kinds trace
// and schedule identically.
struct NetCtx final : ExecSink {
    Network& net;
    int inst;

    NetCtx(Network& n, int i) : net(n), inst(i) {}

    const BehaviorProgram& prog() const { return net.program_of(inst); }
    InstanceState& state() const { return net.instances_[inst]; }

    Value get_property(int slot) const override { return state().props[slot]; }

    void set_property(int slot, const Value& v) override {
        Value stored = coerce_to(prog().property_type(slot), v);
        state().props[slot] = stored;
        net.emit(TraceKind::Assign, inst, prog().property_name(slot) + " = " + stored.render());
    }

    void do_print(const Value& v) override {
        std::string text = v.render();
        if (net.options_.print_to) *net.options_.print_to << text << '\n';
        net.emit(TraceKind::Print, inst, std::move(text));
    }

    void do_send(int port, int message, std::vector<Value> args) override {
        const BehaviorProgram& p = prog();
        const auto& param_types = p.message_param_types(message);
        for (std::size_t i = 0; i < args.size() && i < param_types.size(); ++i)
            args[i] = coerce_to(param_types[i], args[i]);
        const std::string& msg_name = p.message_name(message);
        std::string rendered = p.port_name(port) + "!" + msg_name + "(" + join_args(args) + ")";
        net.emit(TraceKind::Send, inst, rendered);

        // Connectors are bidirectional: a message sent on either endpoint is
        // delivered to the opposite one. Declaration order fixes fan-out.
        bool wired = false;
        for (const auto& c : net.connectors_) {
            int to_inst = -1, to_port = -1;
            if (c.from_instance == inst && c.from_port == port) {
                to_inst = c.to_instance;
                to_port = c.to_port;
            } else if (c.to_instance == inst && c.to_port == port) {
                to_inst = c.from_instance;
                to_port = c.from_port;
            } else {
                continue;
            }
            wired = true;
            ++net.sends_;
            const BehaviorProgram& target = net.program_of(to_inst);
            net.queue_.push_back(PendingMessage{to_inst, to_port, target.message_index(msg_name),
                                                msg_name, args});
        }
        if (!wired) {
            // nothing on the other side: the send is observable, the message
            // can never arrive
            ++net.sends_;
            ++net.drops_;
            net.emit(TraceKind::Drop, inst, rendered + ": unconnected port");
        }
    }

    void do_da(ast::DaActionKind kind, int da, const std::vector<Value>* args) override {
        InstanceState& is = state();
        ml::DaEngine& engine = is.analytics[da];
        const std::string& name = engine.spec().name;
        const Network::DaBinding& binding = net.da_bindings_[is.program][da];
        switch (kind) {
        case ast::DaActionKind::Preprocess: {
            engine.preprocess();
            const auto* pd = engine.prepared();
            net.emit(TraceKind::DaPreprocess, inst,
                     name + " train_rows=" + std::to_string(pd->x_train.size()) +
                         " test_rows=" + std::to_string(pd->x_test.size()));
            break;
        }
        case ast::DaActionKind::Train: {
            engine.train_now(net.step_);
            net.emit(TraceKind::DaTrain, inst,
                     name + " family=" +
                         std::string(family_name(*engine.spec().family)));
            break;
        }
        case ast::DaActionKind::Predict: {
            std::vector<Value> in = args ? *args : std::vector<Value>{};
            Value out = engine.predict(in);
            std::string payload = name + "(" + join_args(in) + ") -> " + out.render();
            if (binding.prediction_slot >= 0) {
                // the f_B coupling: the prediction lands in the declared
                // prediction_results property without a separate assign event
                is.props[binding.prediction_slot] =
                    coerce_to(prog().property_type(binding.prediction_slot), out);
            }
            net.emit(TraceKind::DaPredict, inst, std::move(payload));
            break;
        }
        case ast::DaActionKind::Save: {
            std::vector<Value> row;
            row.reserve(binding.feature_slots.size());
            for (int slot : binding.feature_slots) row.push_back(is.props[slot]);
            std::string line = engine.save_row(row, net.step_);
            net.emit(TraceKind::DaSave, inst, name + " " + line);
            break;
        }
        }
    }
};

Network::Network(std::vector<std::shared_ptr<const BehaviorProgram>> programs,
                 std::vector<std::pair<std::string, int>> instances,
                 std::vector<ResolvedConnector> connectors, std::vector<ClockSpec> clocks,
                 RunOptions options)
    : programs_(std::move(programs)), connectors_(std::move(connectors)),
      clocks_(std::move(clocks)), options_(std::move(options)) {
    // Property slots that feed each DA component: feature values for da_save,
    // the prediction target for da_predict. Resolved once per thing.
    da_bindings_.resize(programs_.size());
    for (std::size_t t = 0; t < programs_.size(); ++t) {
        const BehaviorProgram& p = *programs_[t];
        da_bindings_[t].resize(p.analytics_count());
        for (std::size_t d = 0; d < p.analytics_count(); ++d) {
            const DataAnalyticsSpec& spec = p.analytics_spec(static_cast<int>(d));
            DaBinding& b = da_bindings_[t][d];
            b.prediction_slot = p.property_index(spec.prediction_results);
            for (const auto& f : spec.features) b.feature_slots.push_back(p.property_index(f.name));
        }
    }

    instances_.reserve(instances.size());
    for (auto& [name, prog] : instances) {
        InstanceState is;
        is.name = name;
        is.program = prog;
        const BehaviorProgram& p = *programs_[prog];
        for (std::size_t s = 0; s < p.property_count(); ++s)
            is.props.push_back(Value::default_for(p.property_type(static_cast<int>(s))));
        for (std::size_t d = 0; d < p.analytics_count(); ++d)
            is.analytics.emplace_back(p.analytics_spec(static_cast<int>(d)),
                                      options_.dataset_root, 0.2, options_.seed);
        instances_.push_back(std::move(is));
    }
}

int Network::instance_index(const std::string& name) const {
    for (std::size_t i = 0; i < instances_.size(); ++i)
        if (instances_[i].name == name) return static_cast<int>(i);
    return -1;
}

void Network::emit(TraceKind kind, int inst, std::string payload) {
    if (kind == TraceKind::Error) had_error_ = true;
    trace_.push_back(
        TraceEvent{step_, kind, inst >= 0 ? instances_[inst].name : "@clock", std::move(payload)});
}

bool Network::all_halted() const {
    for (const auto& is : instances_)
        if (!is.halted) return false;
    return true;
}

void Network::halt_with_error(int inst, const std::string& message) {
    emit(TraceKind::Error, inst, message);
    emit(TraceKind::Terminate, inst, "error");
    instances_[inst].halted = true;
}

void Network::instantiate() {
    instantiated_ = true;
    // Phase 1: property initializers in declaration order (silent — the trace
    // starts observing at the entry actions). Black-box models load eagerly;
    // a load failure is a setup error, not a trace event.
    for (std::size_t i = 0; i < instances_.size(); ++i) {
        NetCtx ctx(*this, static_cast<int>(i));
        const BehaviorProgram& p = program_of(static_cast<int>(i));
        for (std::size_t s = 0; s < p.property_count(); ++s) {
            if (!p.property_has_init(static_cast<int>(s))) continue;
            Value v = p.eval_property_init(static_cast<int>(s), ctx);
            instances_[i].props[s] = coerce_to(p.property_type(static_cast<int>(s)), v);
        }
        for (auto& engine : instances_[i].analytics) {
            if (!engine.spec().blackbox) continue;
            try {
                engine.load_blackbox_model();
            } catch (const ml::MlError& e) {
                throw RunError(instances_[i].name + ": " + e.what());
            }
        }
    }
    // Phase 2: chart-level then initial-state entry, instance by instance in
    // declaration order, each settling its eventless transitions before the
    // next instance starts.
    for (std::size_t i = 0; i < instances_.size(); ++i) enter_initial(static_cast<int>(i));
}

void Network::enter_initial(int inst) {
    const BehaviorProgram& p = program_of(inst);
    if (!p.has_chart()) return; // inert thing: every delivery will drop
    NetCtx ctx(*this, inst);
    try {
        p.run_chart_entry(ctx);
        enter_state(inst, p.initial_state());
        if (!instances_[inst].halted) settle(inst);
    } catch (const std::exception& e) {
        halt_with_error(inst, e.what());
    }
}

void Network::enter_state(int inst, int state) {
    const BehaviorProgram& p = program_of(inst);
    instances_[inst].state = state;
    emit(TraceKind::EnterState, inst, p.state_name(state));
    NetCtx ctx(*this, inst);
    p.run_state_entry(state, ctx);
    if (p.state_is_final(state)) {
        emit(TraceKind::Terminate, inst, "final state " + p.state_name(state));
        instances_[inst].halted = true;
    }
}

void Network::fire_transition(int inst, int transition, const EventBinding* event) {
    const BehaviorProgram& p = program_of(inst);
    NetCtx ctx(*this, inst);
    int from = instances_[inst].state;
    p.run_state_exit(from, ctx);
    emit(TraceKind::ExitState, inst, p.state_name(from));
    p.run_transition_actions(transition, ctx, event);
    enter_state(inst, p.transition_target(transition));
}

void Network::settle(int inst) {
    const BehaviorProgram& p = program_of(inst);
    for (int fired = 0; !instances_[inst].halted; ++fired) {
        if (fired >= kLivelockLimit) {
            halt_with_error(inst, "livelock: " + std::to_string(kLivelockLimit) +
                                      " eventless transitions without quiescence");
            return;
        }
        int t = p.eventless_transition(instances_[inst].state);
        if (t < 0) return;
        fire_transition(inst, t, nullptr);
    }
}

void Network::deliver(PendingMessage msg) {
    InstanceState& is = instances_[msg.to_instance];
    const BehaviorProgram& p = program_of(msg.to_instance);
    std::string rendered =
        p.port_name(msg.to_port) + "?" + msg.name + "(" + join_args(msg.args) + ")";
    if (is.halted) {
        ++drops_;
        emit(TraceKind::Drop, msg.to_instance, rendered + ": instance halted");
        return;
    }
    int t = msg.message >= 0 && is.state >= 0
                ? p.find_transition(is.state, msg.to_port, msg.message)
                : -1;
    if (t < 0) {
        ++drops_;
        std::string state_name = is.state >= 0 ? p.state_name(is.state) : "(no chart)";
        emit(TraceKind::Drop, msg.to_instance, rendered + ": no transition in " + state_name);
        return;
    }
    ++delivers_;
    emit(TraceKind::Deliver, msg.to_instance, rendered);
    try {
        // The network only knows the argument values; the program enriches
        // the binding with its transition's event variable and declaration.
        EventBinding binding;
        binding.args = &msg.args;
        fire_transition(msg.to_instance, t, &binding);
        if (!instances_[msg.to_instance].halted) settle(msg.to_instance);
    } catch (const std::exception& e) {
        halt_with_error(msg.to_instance, e.what());
    }
}

bool Network::step() {
    if (!instantiated_ || all_halted()) return false;
    if (queue_.empty() && clocks_.empty()) return false; // quiescent
    ++step_;
    for (const auto& clock : clocks_) {
        if (step_ % clock.period != 0) continue;
        ++sends_;
        emit(TraceKind::Send, -1,
             instances_[clock.instance].name + "." +
                 program_of(clock.instance).port_name(clock.port) + "!" + clock.message_name +
                 "()");
        queue_.push_back(
            PendingMessage{clock.instance, clock.port, clock.message, clock.message_name, {}});
    }
    if (queue_.empty()) return true; // idle tick: only the logical clock moved
    PendingMessage msg = std::move(queue_.front());
    queue_.pop_front();
    deliver(std::move(msg));
    return true;
}

void Network::run() {
    if (!instantiated_) instantiate();
    if (!clocks_.empty() && !options_.max_steps)
        throw RunError("a configuration with @clock sources needs an explicit step budget");
    std::uint64_t executed = 0;
    while (true) {
        if (options_.max_steps && executed >= *options_.max_steps) break;
        if (!step()) break;
        ++executed;
    }
}

std::vector<ClockSpec> parse_clocks(
    const std::vector<ast::Annotation>& annotations,
    const std::vector<std::pair<std::string, int>>& instances,
    const std::vector<std::shared_ptr<const BehaviorProgram>>& programs) {
    std::vector<ClockSpec> clocks;
    for (const auto& ann : annotations) {
        if (ann.key != "clock") continue;
        // format: "instance.port message period"
        const std::string& v = ann.value;
        auto bad = [&](const std::string& why) -> RunError {
            return RunError("@clock \"" + v + "\": " + why);
        };
        std::size_t dot = v.find('.');
        std::size_t sp1 = v.find(' ', dot == std::string::npos ? 0 : dot);
        std::size_t sp2 = sp1 == std::string::npos ? std::string::npos : v.find(' ', sp1 + 1);
        if (dot == std::string::npos || sp1 == std::string::npos || sp2 == std::string::npos)
            throw bad("expected \"instance.port message period\"");
        std::string inst_name = v.substr(0, dot);
        std::string port_name = v.substr(dot + 1, sp1 - dot - 1);
        std::string message = v.substr(sp1 + 1, sp2 - sp1 - 1);
        std::string period_text = v.substr(sp2 + 1);

        ClockSpec clock;
        for (std::size_t i = 0; i < instances.size(); ++i)
            if (instances[i].first == inst_name) clock.instance = static_cast<int>(i);
        if (clock.instance < 0) throw bad("unknown instance '" + inst_name + "'");
        const BehaviorProgram& p = *programs[instances[clock.instance].second];
        clock.port = p.port_index(port_name);
        if (clock.port < 0) throw bad("unknown port '" + port_name + "'");
        clock.message = p.message_index(message);
        if (clock.message < 0) throw bad("unknown message '" + message + "'");
        if (!p.message_param_types(clock.message).empty())
            throw bad("clock message '" + message + "' must be parameterless");
        clock.message_name = message;
        char* end = nullptr;
        unsigned long long period = std::strtoull(period_text.c_str(), &end, 10);
        if (period == 0 || end == period_text.c_str() || *end != '\0')
            throw bad("period must be a positive integer");
        clock.period = period;
        clocks.push_back(std::move(clock));
    }
    return clocks;
}

} // namespace mlq::rt
