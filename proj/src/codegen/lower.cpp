// Lowering: resolved things to flat instruction code plus dense dispatch
// tables. States, ports, messages, and properties keep their declaration-order
// numbering, so renaming one element never renumbers another.

#include <cstdio>

#include "mlq/plan.hpp"
#include "mlq/validate.hpp"

namespace mlq::plan {

const char* op_name(Op op) {
    switch (op) {
    case Op::PushInt: return "push_int";
    case Op::PushNum: return "push_num";
    case Op::PushBool: return "push_bool";
    case Op::PushStr: return "push_str";
    case Op::Load: return "load";
    case Op::Arg: return "arg";
    case Op::Fail: return "fail";
    case Op::Neg: return "neg";
    case Op::Not: return "not";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Div: return "div";
    case Op::Eq: return "eq";
    case Op::Ne: return "ne";
    case Op::Lt: return "lt";
    case Op::Le: return "le";
    case Op::Gt: return "gt";
    case Op::Ge: return "ge";
    case Op::AndThen: return "and_then";
    case Op::OrElse: return "or_else";
    case Op::Print: return "print";
    case Op::Store: return "store";
    case Op::Send: return "send";
    case Op::Branch: return "branch";
    case Op::Jump: return "jump";
    case Op::DaPreprocess: return "da_preprocess";
    case Op::DaTrain: return "da_train";
    case Op::DaSave: return "da_save";
    case Op::DaPredict: return "da_predict";
    case Op::End: return "end";
    }
    return "?";
}

namespace {

// Compiles expressions and action blocks of one thing into its code array.
// Event parameters are resolved to argument positions here; a reference that
// can never bind (wrong variable, unknown parameter) compiles to a `fail`
// carrying the exact message the evaluation would raise, so replay and direct
// interpretation stay indistinguishable even on that path.
struct Lowerer {
    const ResolvedThing& thing;
    PlanThing& out;

    struct EventCtx {
        const ast::EventClause* clause = nullptr;
        const ast::Message* message = nullptr;
    };

    long long here() const { return static_cast<long long>(out.code.size()); }

    std::size_t emit(Op op, long long a = 0, long long b = 0, long long c = 0) {
        Instr in;
        in.op = op;
        in.a = a;
        in.b = b;
        in.c = c;
        out.code.push_back(std::move(in));
        return out.code.size() - 1;
    }

    void emit_text(Op op, std::string text) {
        Instr in;
        in.op = op;
        in.text = std::move(text);
        out.code.push_back(std::move(in));
    }

    void expr(const ast::Expr& e, const EventCtx* ev) {
        if (const auto* i = std::get_if<ast::IntLit>(&e.node)) {
            emit(Op::PushInt, i->value);
        } else if (const auto* f = std::get_if<ast::FloatLit>(&e.node)) {
            Instr in;
            in.op = Op::PushNum;
            in.num = f->value;
            out.code.push_back(std::move(in));
        } else if (const auto* s = std::get_if<ast::StringLit>(&e.node)) {
            emit_text(Op::PushStr, s->value);
        } else if (const auto* b = std::get_if<ast::BoolLit>(&e.node)) {
            emit(Op::PushBool, b->value ? 1 : 0);
        } else if (const auto* n = std::get_if<ast::NameRef>(&e.node)) {
            emit(Op::Load, thing.property_index(n->name));
        } else if (const auto* p = std::get_if<ast::ParamRef>(&e.node)) {
            param_ref(*p, ev);
        } else if (const auto* u = std::get_if<ast::Unary>(&e.node)) {
            expr(*u->operand, ev);
            emit(u->op == ast::UnaryOp::Neg ? Op::Neg : Op::Not);
        } else if (const auto* bin = std::get_if<ast::Binary>(&e.node)) {
            binary(*bin, ev);
        }
    }

    void param_ref(const ast::ParamRef& p, const EventCtx* ev) {
        if (!ev || !ev->clause || p.var != ev->clause->var) {
            emit_text(Op::Fail, "event variable '" + p.var + "' is not bound here");
            return;
        }
        const auto& params = ev->message->params;
        for (std::size_t i = 0; i < params.size(); ++i) {
            if (params[i].name == p.param) {
                emit(Op::Arg, static_cast<long long>(i));
                return;
            }
        }
        emit_text(Op::Fail,
                  "message " + ev->message->name + " has no parameter '" + p.param + "'");
    }

    void binary(const ast::Binary& b, const EventCtx* ev) {
        switch (b.op) {
        case ast::BinaryOp::And: {
            expr(*b.lhs, ev);
            std::size_t skip = emit(Op::AndThen);
            expr(*b.rhs, ev);
            out.code[skip].a = here();
            return;
        }
        case ast::BinaryOp::Or: {
            expr(*b.lhs, ev);
            std::size_t skip = emit(Op::OrElse);
            expr(*b.rhs, ev);
            out.code[skip].a = here();
            return;
        }
        default: break;
        }
        expr(*b.lhs, ev);
        expr(*b.rhs, ev);
        switch (b.op) {
        case ast::BinaryOp::Add: emit(Op::Add); break;
        case ast::BinaryOp::Sub: emit(Op::Sub); break;
        case ast::BinaryOp::Mul: emit(Op::Mul); break;
        case ast::BinaryOp::Div: emit(Op::Div); break;
        case ast::BinaryOp::Eq: emit(Op::Eq); break;
        case ast::BinaryOp::Ne: emit(Op::Ne); break;
        case ast::BinaryOp::Lt: emit(Op::Lt); break;
        case ast::BinaryOp::Le: emit(Op::Le); break;
        case ast::BinaryOp::Gt: emit(Op::Gt); break;
        case ast::BinaryOp::Ge: emit(Op::Ge); break;
        default: break;
        }
    }

    void action(const ast::Action& act, const EventCtx* ev) {
        if (const auto* pr = std::get_if<ast::PrintAction>(&act.node)) {
            expr(*pr->value, ev);
            emit(Op::Print);
        } else if (const auto* as = std::get_if<ast::AssignAction>(&act.node)) {
            expr(*as->value, ev);
            emit(Op::Store, thing.property_index(as->property));
        } else if (const auto* sn = std::get_if<ast::SendAction>(&act.node)) {
            for (const auto& arg : sn->args) expr(*arg, ev);
            emit(Op::Send, thing.port_index(sn->port), thing.message_index(sn->message),
                 static_cast<long long>(sn->args.size()));
        } else if (const auto* br = std::get_if<ast::IfAction>(&act.node)) {
            expr(*br->condition, ev);
            std::size_t cond = emit(Op::Branch);
            long long then_ip = here();
            block(br->then_actions, ev);
            std::size_t leap = emit(Op::Jump);
            long long else_ip = here();
            block(br->else_actions, ev);
            out.code[cond].a = then_ip;
            out.code[cond].b = else_ip;
            out.code[leap].a = here();
        } else if (const auto* da = std::get_if<ast::DaAction>(&act.node)) {
            long long idx = thing.analytics_index(da->da);
            switch (da->kind) {
            case ast::DaActionKind::Preprocess: emit(Op::DaPreprocess, idx); break;
            case ast::DaActionKind::Train: emit(Op::DaTrain, idx); break;
            case ast::DaActionKind::Save: emit(Op::DaSave, idx); break;
            case ast::DaActionKind::Predict:
                for (const auto& arg : da->args) expr(*arg, ev);
                emit(Op::DaPredict, idx, 0, static_cast<long long>(da->args.size()));
                break;
            }
        }
    }

    void block(const std::vector<ast::Action>& actions, const EventCtx* ev) {
        for (const auto& a : actions) action(a, ev);
    }

    // A fragment is a complete executable range: first instruction's ip,
    // terminated by End. Empty blocks stay unmaterialized (-1).
    long long fragment(const std::vector<ast::Action>& actions, const EventCtx* ev) {
        if (actions.empty()) return -1;
        long long ip = here();
        block(actions, ev);
        emit(Op::End);
        return ip;
    }

    long long init_fragment(const ast::Expr& e) {
        long long ip = here();
        expr(e, nullptr);
        emit(Op::End);
        return ip;
    }
};

} // namespace

PlanThing lower_thing(const ResolvedThing& thing) {
    PlanThing p;
    Lowerer lo{thing, p};

    p.name = thing.name;
    for (const auto& a : thing.annotations) p.annotations.push_back({a.key, a.value});
    for (const auto& port : thing.ports) p.ports.push_back(port.name);
    for (const auto& msg : thing.messages) {
        PlanMessage m;
        m.name = msg.name;
        for (const auto& param : msg.params)
            m.param_types.push_back(type_from_name(param.type).value_or(ValueType::Int32));
        p.messages.push_back(std::move(m));
    }
    for (std::size_t i = 0; i < thing.properties.size(); ++i) {
        const auto& prop = thing.properties[i];
        PlanProperty q;
        q.name = prop.name;
        q.type = thing.property_type(static_cast<int>(i));
        if (prop.init) q.init_ip = lo.init_fragment(*prop.init);
        p.properties.push_back(std::move(q));
    }
    p.analytics = thing.analytics;

    if (thing.chart) {
        const auto& chart = *thing.chart;
        p.has_chart = true;
        p.initial = thing.state_index(chart.initial);
        p.chart_entry_ip = lo.fragment(chart.on_entry, nullptr);

        for (const auto& s : chart.states) {
            PlanState ps;
            ps.name = s.name;
            ps.is_final = s.is_final;
            ps.entry_ip = lo.fragment(s.on_entry, nullptr);
            ps.exit_ip = lo.fragment(s.on_exit, nullptr);
            p.states.push_back(std::move(ps));
        }

        const long long ports = static_cast<long long>(p.ports.size());
        const long long messages = static_cast<long long>(p.messages.size());
        p.delta.assign(static_cast<std::size_t>(static_cast<long long>(p.states.size()) *
                                                ports * messages),
                       -1);

        long long ti = 0;
        for (std::size_t si = 0; si < chart.states.size(); ++si) {
            for (const auto& t : chart.states[si].transitions) {
                Lowerer::EventCtx ev;
                if (t.event) {
                    ev.clause = &*t.event;
                    ev.message = &thing.messages[thing.message_index(t.event->message)];
                }
                PlanTransition pt;
                pt.target = thing.state_index(t.target);
                pt.actions_ip = lo.fragment(t.actions, t.event ? &ev : nullptr);
                p.transitions.push_back(pt);

                if (t.event) {
                    long long pi = thing.port_index(t.event->port);
                    long long mi = thing.message_index(t.event->message);
                    long long& cell = p.delta[static_cast<std::size_t>(
                        (static_cast<long long>(si) * ports + pi) * messages + mi)];
                    if (cell == -1) cell = ti; // first declared wins
                } else if (p.states[si].eventless == -1) {
                    p.states[si].eventless = ti;
                }
                ++ti;
            }
        }
    }
    return p;
}

ExecutionPlan lower_configuration(const ResolvedModel& model, int config) {
    const auto& cfg = model.configurations[static_cast<std::size_t>(config)];
    ExecutionPlan plan;
    plan.config = cfg.name;
    for (const auto& a : model.annotations)
        plan.model_annotations.push_back({a.key, a.value});
    for (const auto& a : cfg.annotations) plan.annotations.push_back({a.key, a.value});
    for (const auto& t : model.things) plan.things.push_back(lower_thing(t));
    for (const auto& inst : cfg.instances)
        plan.instances.push_back({inst.name, inst.thing});
    plan.connectors = cfg.connectors;
    return plan;
}

std::string content_digest(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

class PlanBackend final : public Backend {
public:
    const std::string& name() const override {
        static const std::string n = "plan";
        return n;
    }

    std::vector<Artifact> emit(const ResolvedModel& model) const override {
        std::vector<Artifact> artifacts;
        std::string manifest = "MLQMANIFEST/1\n";
        for (std::size_t i = 0; i < model.configurations.size(); ++i) {
            ExecutionPlan p = lower_configuration(model, static_cast<int>(i));
            std::string text = serialize_plan(p);
            std::string file = p.config + ".mlqplan";
            manifest += "plan " + file + " fnv1a64 " + content_digest(text) + " bytes " +
                        std::to_string(text.size()) + "\n";
            artifacts.push_back({std::move(file), std::move(text)});
        }
        artifacts.push_back({"manifest.txt", std::move(manifest)});
        return artifacts;
    }
};

const PlanBackend kPlanBackend;

} // namespace

const Backend* find_backend(const std::string& name) {
    if (name == "plan") return &kPlanBackend;
    return nullptr;
}

std::vector<std::string> backend_names() { return {"plan"}; }

CompileResult compile(const ResolvedModel& model, const std::string& backend) {
    CompileResult res;
    auto v = check_valid(model);
    auto c = check_complete(model);
    res.diagnostics.insert(res.diagnostics.end(), v.begin(), v.end());
    res.diagnostics.insert(res.diagnostics.end(), c.begin(), c.end());
    if (has_errors(res.diagnostics)) return res;

    const Backend* b = find_backend(backend);
    if (!b) {
        Diagnostic d;
        d.code = "G001";
        d.severity = Severity::Error;
        d.message = "unknown backend '" + backend + "'";
        res.diagnostics.push_back(std::move(d));
        return res;
    }
    res.artifacts = b->emit(model);
    return res;
}

} // namespace mlq::plan
