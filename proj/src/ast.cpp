#include "mlq/ast.hpp"

namespace mlq::ast {

namespace {

ExprPtr clone_ptr(const ExprPtr& p) {
    return p ? std::make_unique<Expr>(clone_expr(*p)) : nullptr;
}

std::vector<ExprPtr> clone_ptrs(const std::vector<ExprPtr>& ps) {
    std::vector<ExprPtr> out;
    out.reserve(ps.size());
    for (const auto& p : ps) out.push_back(clone_ptr(p));
    return out;
}

} // namespace

Expr clone_expr(const Expr& e) {
    Expr out;
    out.span = e.span;
    if (const auto* v = std::get_if<IntLit>(&e.node)) {
        out.node = *v;
    } else if (const auto* v = std::get_if<FloatLit>(&e.node)) {
        out.node = *v;
    } else if (const auto* v = std::get_if<StringLit>(&e.node)) {
        out.node = *v;
    } else if (const auto* v = std::get_if<BoolLit>(&e.node)) {
        out.node = *v;
    } else if (const auto* v = std::get_if<NameRef>(&e.node)) {
        out.node = *v;
    } else if (const auto* v = std::get_if<ParamRef>(&e.node)) {
        out.node = *v;
    } else if (const auto* v = std::get_if<Unary>(&e.node)) {
        Unary u;
        u.op = v->op;
        u.operand = clone_ptr(v->operand);
        out.node = std::move(u);
    } else if (const auto* v = std::get_if<Binary>(&e.node)) {
        Binary b;
        b.op = v->op;
        b.lhs = clone_ptr(v->lhs);
        b.rhs = clone_ptr(v->rhs);
        out.node = std::move(b);
    }
    return out;
}

Action clone_action(const Action& a) {
    Action out;
    out.span = a.span;
    if (const auto* v = std::get_if<PrintAction>(&a.node)) {
        PrintAction pa;
        pa.value = clone_ptr(v->value);
        out.node = std::move(pa);
    } else if (const auto* v = std::get_if<AssignAction>(&a.node)) {
        AssignAction as;
        as.property = v->property;
        as.value = clone_ptr(v->value);
        out.node = std::move(as);
    } else if (const auto* v = std::get_if<SendAction>(&a.node)) {
        SendAction sa;
        sa.port = v->port;
        sa.message = v->message;
        sa.args = clone_ptrs(v->args);
        out.node = std::move(sa);
    } else if (const auto* v = std::get_if<IfAction>(&a.node)) {
        IfAction ia;
        ia.condition = clone_ptr(v->condition);
        ia.then_actions = clone_actions(v->then_actions);
        ia.else_actions = clone_actions(v->else_actions);
        ia.has_else = v->has_else;
        out.node = std::move(ia);
    } else if (const auto* v = std::get_if<DaAction>(&a.node)) {
        DaAction da;
        da.kind = v->kind;
        da.da = v->da;
        da.args = clone_ptrs(v->args);
        out.node = std::move(da);
    }
    return out;
}

std::vector<Action> clone_actions(const std::vector<Action>& as) {
    std::vector<Action> out;
    out.reserve(as.size());
    for (const auto& a : as) out.push_back(clone_action(a));
    return out;
}

Property clone_property(const Property& p) {
    Property out;
    out.name = p.name;
    out.type = p.type;
    if (p.init) out.init = clone_expr(*p.init);
    out.span = p.span;
    return out;
}

Transition clone_transition(const Transition& t) {
    Transition out;
    out.target = t.target;
    out.event = t.event;
    out.actions = clone_actions(t.actions);
    out.span = t.span;
    return out;
}

State clone_state(const State& s) {
    State out;
    out.name = s.name;
    out.is_final = s.is_final;
    out.on_entry = clone_actions(s.on_entry);
    out.on_exit = clone_actions(s.on_exit);
    out.transitions.reserve(s.transitions.size());
    for (const auto& t : s.transitions) out.transitions.push_back(clone_transition(t));
    out.span = s.span;
    return out;
}

StateChart clone_statechart(const StateChart& sc) {
    StateChart out;
    out.name = sc.name;
    out.initial = sc.initial;
    out.on_entry = clone_actions(sc.on_entry);
    out.on_exit = clone_actions(sc.on_exit);
    out.states.reserve(sc.states.size());
    for (const auto& s : sc.states) out.states.push_back(clone_state(s));
    out.span = sc.span;
    return out;
}

} // namespace mlq::ast
