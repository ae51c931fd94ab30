#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlq/ml/engine.hpp"
#include "mlq/program.hpp"
#include "mlq/resolved.hpp"
#include "mlq/trace.hpp"

namespace mlq::rt {

// Raised for failures that prevent the simulation from being set up at all
// (bad configuration name, unloadable black-box model, malformed @clock).
// Failures during simulation become error trace events instead.
struct RunError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunOptions {
    std::uint64_t seed = 10;       // default training seed for DA components
    std::optional<std::uint64_t> max_steps; // empty = run to quiescence
    std::string dataset_root;      // rebases relative dataset paths; "" = cwd
    std::ostream* print_to = nullptr; // print actions echo here (usually stdout)
};

// A periodic logical-clock source declared as @clock "instance.port message N"
// on the configuration: every N steps the named instance receives the
// (parameterless) message as if sent by a built-in clock.
struct ClockSpec {
    int instance = -1;
    int port = -1;
    int message = -1; // message index within the target thing
    std::string message_name;
    std::uint64_t period = 1;
};

struct PendingMessage {
    int to_instance = -1;
    int to_port = -1;
    int message = -1; // message index within the receiving thing, -1 unknown
    std::string name; // message name, for trace payloads
    std::vector<Value> args;
};

struct InstanceState {
    std::string name;
    int program = -1;   // index into Network's program table
    int state = -1;     // current chart state, -1 before entry / without chart
    bool halted = false;
    std::vector<Value> props;
    std::vector<ml::DaEngine> analytics;
};

// The simulated system: instances, connectors, one totally ordered FIFO of
// in-flight messages, and the trace. Single-threaded by contract.
class Network {
public:
    Network(std::vector<std::shared_ptr<const BehaviorProgram>> programs,
            std::vector<std::pair<std::string, int>> instances, // name, program
            std::vector<ResolvedConnector> connectors, std::vector<ClockSpec> clocks,
            RunOptions options);

    // Step 0: create every instance, run chart-level and initial-state entry
    // actions in declaration order, and settle eventless transitions.
    void instantiate();

    // One scheduler step: advance the step counter, emit due clock ticks,
    // deliver the oldest pending message, settle the affected instance.
    // Returns false once the network has stopped (quiescent, all instances
    // halted, or the step budget is spent).
    bool step();

    // instantiate + step until the stop condition.
    void run();

    const std::vector<TraceEvent>& trace() const { return trace_; }
    std::string trace_text() const { return render_trace(trace_); }
    bool had_error() const { return had_error_; }

    std::uint64_t current_step() const { return step_; }
    std::uint64_t sends() const { return sends_; }
    std::uint64_t delivers() const { return delivers_; }
    std::uint64_t drops() const { return drops_; }
    std::size_t queued() const { return queue_.size(); }

    std::size_t instance_count() const { return instances_.size(); }
    const InstanceState& instance(int i) const { return instances_[i]; }
    int instance_index(const std::string& name) const;
    const BehaviorProgram& program_of(int instance) const {
        return *programs_[instances_[instance].program];
    }

private:
    friend struct NetCtx;

    void enter_initial(int inst);
    void deliver(PendingMessage msg);
    void settle(int inst);
    void fire_transition(int inst, int transition, const EventBinding* event);
    void enter_state(int inst, int state);
    void halt_with_error(int inst, const std::string& message);
    bool all_halted() const;
    void emit(TraceKind kind, int inst, std::string payload);

    std::vector<std::shared_ptr<const BehaviorProgram>> programs_;
    std::vector<InstanceState> instances_;
    std::vector<ResolvedConnector> connectors_;
    std::vector<ClockSpec> clocks_;
    RunOptions options_;

    // per (instance, da): property slots feeding predictions and saves
    struct DaBinding {
        int prediction_slot = -1;
        std::vector<int> feature_slots;
    };
    std::vector<std::vector<DaBinding>> da_bindings_;

    std::deque<PendingMessage> queue_;
    std::vector<TraceEvent> trace_;
    std::uint64_t step_ = 0;
    std::uint64_t sends_ = 0, delivers_ = 0, drops_ = 0;
    bool instantiated_ = false;
    bool had_error_ = false;
};

// Assembles the interpreter route: one syntax-walking program per thing.
// config may be empty when the model has exactly one configuration.
Network interpret_network(const ResolvedModel& model, const std::string& config,
                          const RunOptions& options);

// Shared by both assembly routes: parse @clock annotations of a configuration.
std::vector<ClockSpec> parse_clocks(
    const std::vector<ast::Annotation>& annotations,
    const std::vector<std::pair<std::string, int>>& instances,
    const std::vector<std::shared_ptr<const BehaviorProgram>>& programs);

} // namespace mlq::rt
