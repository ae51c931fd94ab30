#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mlq {

// One observable simulation event. The trace is the ground truth both
// execution routes are compared on, so every payload must be a deterministic
// function of (model, configuration, seed, datasets) — no wall-clock values,
// no filesystem paths.
enum class TraceKind {
    EnterState,
    ExitState,
    Send,
    Deliver,
    Drop,
    Print,
    Assign,
    DaPreprocess,
    DaTrain,
    DaPredict,
    DaSave,
    Error,
    Terminate,
};

const char* trace_kind_name(TraceKind k);

struct TraceEvent {
    std::uint64_t step = 0;
    TraceKind kind = TraceKind::Print;
    std::string instance;
    std::string payload;
};

// Tab-separated line: step, kind, instance, payload. Payloads never contain
// tabs or newlines by construction.
std::string render_trace_event(const TraceEvent& e);

// One line per event, each newline-terminated.
std::string render_trace(const std::vector<TraceEvent>& events);

} // namespace mlq
