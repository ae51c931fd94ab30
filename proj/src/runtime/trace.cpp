#include "mlq/trace.hpp"

namespace mlq {

const char* trace_kind_name(TraceKind k) {
    switch (k) {
    case TraceKind::EnterState: return "enter-state";
    case TraceKind::ExitState: return "exit-state";
    case TraceKind::Send: return "send";
    case TraceKind::Deliver: return "deliver";
    case TraceKind::Drop: return "drop";
    case TraceKind::Print: return "print";
    case TraceKind::Assign: return "assign";
    case TraceKind::DaPreprocess: return "da-preprocess";
    case TraceKind::DaTrain: return "da-train";
    case TraceKind::DaPredict: return "da-predict";
    case TraceKind::DaSave: return "da-save";
    case TraceKind::Error: return "error";
    case TraceKind::Terminate: return "terminate";
    }
    return "?";
}

std::string render_trace_event(const TraceEvent& e) {
    std::string out = std::to_string(e.step);
    out += '\t';
    out += trace_kind_name(e.kind);
    out += '\t';
    out += e.instance;
    out += '\t';
    out += e.payload;
    return out;
}

std::string render_trace(const std::vector<TraceEvent>& events) {
    std::string out;
    for (const auto& e : events) {
        out += render_trace_event(e);
        out += '\n';
    }
    return out;
}

} // namespace mlq
