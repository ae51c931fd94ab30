#include "mlq/printer.hpp"

#include <sstream>

#include "mlq/numfmt.hpp"

namespace mlq {

namespace ast {

const char* binary_op_text(BinaryOp op) {
    switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    case BinaryOp::Eq: return "==";
    case BinaryOp::Ne: return "!=";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::And: return "and";
    case BinaryOp::Or: return "or";
    }
    return "?";
}

const char* da_action_keyword(DaActionKind k) {
    switch (k) {
    case DaActionKind::Preprocess: return "da_preprocess";
    case DaActionKind::Train: return "da_train";
    case DaActionKind::Predict: return "da_predict";
    case DaActionKind::Save: return "da_save";
    }
    return "?";
}

} // namespace ast

namespace {

using namespace ast;

int binary_prec(BinaryOp op) {
    switch (op) {
    case BinaryOp::Or: return 1;
    case BinaryOp::And: return 2;
    case BinaryOp::Eq:
    case BinaryOp::Ne:
    case BinaryOp::Lt:
    case BinaryOp::Le:
    case BinaryOp::Gt:
    case BinaryOp::Ge: return 4;
    case BinaryOp::Add:
    case BinaryOp::Sub: return 5;
    case BinaryOp::Mul:
    case BinaryOp::Div: return 6;
    }
    return 8;
}

constexpr int kNotPrec = 3;
constexpr int kNegPrec = 7;
constexpr int kPrimaryPrec = 8;

int expr_prec(const Expr& e) {
    if (const auto* b = std::get_if<Binary>(&e.node)) return binary_prec(b->op);
    if (const auto* u = std::get_if<Unary>(&e.node))
        return u->op == UnaryOp::Not ? kNotPrec : kNegPrec;
    return kPrimaryPrec;
}

void write_expr(std::ostream& os, const Expr& e, int parent_prec, bool right_side);

void write_child(std::ostream& os, const Expr& child, int parent_prec, bool right_side) {
    int p = expr_prec(child);
    bool parens = right_side ? p <= parent_prec : p < parent_prec;
    if (parens) os << '(';
    write_expr(os, child, 0, false);
    if (parens) os << ')';
}

void write_expr(std::ostream& os, const Expr& e, int, bool) {
    if (const auto* v = std::get_if<IntLit>(&e.node)) {
        os << render_int(v->value);
    } else if (const auto* v = std::get_if<FloatLit>(&e.node)) {
        os << render_double(v->value);
    } else if (const auto* v = std::get_if<StringLit>(&e.node)) {
        os << quote_string(v->value);
    } else if (const auto* v = std::get_if<BoolLit>(&e.node)) {
        os << (v->value ? "true" : "false");
    } else if (const auto* v = std::get_if<NameRef>(&e.node)) {
        os << v->name;
    } else if (const auto* v = std::get_if<ParamRef>(&e.node)) {
        os << v->var << '.' << v->param;
    } else if (const auto* v = std::get_if<Unary>(&e.node)) {
        if (v->op == UnaryOp::Not) {
            os << "not ";
            write_child(os, *v->operand, kNotPrec, false);
        } else {
            os << '-';
            write_child(os, *v->operand, kNegPrec, true);
        }
    } else if (const auto* v = std::get_if<Binary>(&e.node)) {
        int p = binary_prec(v->op);
        write_child(os, *v->lhs, p, false);
        os << ' ' << binary_op_text(v->op) << ' ';
        write_child(os, *v->rhs, p, true);
    }
}

class Printer {
public:
    std::string print(const ModelUnit& m) {
        bool first = true;
        for (const auto& a : m.annotations) {
            write_annotation(a);
            os_ << '\n';
            first = false;
        }
        for (const auto& t : m.things) {
            if (!first) os_ << '\n';
            first = false;
            print_thing(t);
        }
        for (const auto& c : m.configurations) {
            if (!first) os_ << '\n';
            first = false;
            print_configuration(c);
        }
        return os_.str();
    }

private:
    std::ostringstream os_;
    int indent_ = 0;

    void line_start() {
        for (int i = 0; i < indent_; ++i) os_ << "    ";
    }

    void write_annotation(const Annotation& a) { os_ << '@' << a.key << ' ' << quote_string(a.value); }

    template <typename Seq>
    void write_joined(const Seq& items) {
        bool first = true;
        for (const auto& it : items) {
            if (!first) os_ << ", ";
            first = false;
            os_ << it;
        }
    }

    void print_thing(const Thing& t) {
        line_start();
        os_ << "thing ";
        if (t.is_fragment) os_ << "fragment ";
        os_ << t.name;
        if (!t.includes.empty()) {
            os_ << " includes ";
            write_joined(t.includes);
        }
        for (const auto& a : t.annotations) {
            os_ << ' ';
            write_annotation(a);
        }
        os_ << " {\n";
        ++indent_;
        for (const auto& p : t.ports) print_port(p);
        for (const auto& m : t.messages) print_message(m);
        for (const auto& p : t.properties) print_property(p);
        for (const auto& da : t.analytics) print_data_analytics(da);
        for (const auto& sc : t.statecharts) print_statechart(sc);
        --indent_;
        line_start();
        os_ << "}\n";
    }

    void print_port(const Port& p) {
        line_start();
        os_ << (p.provided ? "provided" : "required") << " port " << p.name << " {\n";
        ++indent_;
        if (!p.receives.empty()) {
            line_start();
            os_ << "receives ";
            write_joined(p.receives);
            os_ << '\n';
        }
        if (!p.sends.empty()) {
            line_start();
            os_ << "sends ";
            write_joined(p.sends);
            os_ << '\n';
        }
        --indent_;
        line_start();
        os_ << "}\n";
    }

    void print_message(const Message& m) {
        line_start();
        os_ << "message " << m.name << '(';
        bool first = true;
        for (const auto& p : m.params) {
            if (!first) os_ << ", ";
            first = false;
            os_ << p.name << " : " << p.type;
        }
        os_ << ")\n";
    }

    void print_property(const Property& p) {
        line_start();
        os_ << "property " << p.name << " : " << p.type;
        if (p.init) {
            os_ << " = ";
            write_expr(os_, *p.init, 0, false);
        }
        os_ << '\n';
    }

    void print_data_analytics(const DataAnalytics& da) {
        line_start();
        os_ << "data_analytics " << da.name;
        for (const auto& a : da.annotations) {
            os_ << ' ';
            write_annotation(a);
        }
        os_ << " {\n";
        ++indent_;
        if (da.labels) {
            line_start();
            os_ << "labels " << (*da.labels ? "ON" : "OFF") << '\n';
        }
        if (!da.features.empty()) {
            line_start();
            os_ << "features ";
            write_joined(da.features);
            os_ << '\n';
        }
        if (!da.prediction_results.empty()) {
            line_start();
            os_ << "prediction_results " << da.prediction_results << '\n';
        }
        if (!da.dataset.empty()) {
            line_start();
            os_ << "dataset " << quote_string(da.dataset) << '\n';
        }
        if (da.automl) {
            line_start();
            os_ << "automl " << (*da.automl ? "ON" : "OFF") << '\n';
        }
        if (da.sequential) {
            line_start();
            os_ << "sequential " << (*da.sequential ? "TRUE" : "FALSE") << '\n';
        }
        if (da.timestamps) {
            line_start();
            os_ << "timestamps " << (*da.timestamps ? "ON" : "OFF") << '\n';
        }
        if (!da.scaler.empty()) {
            line_start();
            os_ << "preprocess_feature_scaler " << da.scaler << '\n';
        }
        if (da.algorithm) {
            line_start();
            os_ << "model_algorithm " << da.algorithm->family << ' ' << da.algorithm->instance;
            if (!da.algorithm->params.empty()) {
                os_ << " (";
                bool first = true;
                for (const auto& hp : da.algorithm->params) {
                    if (!first) os_ << ", ";
                    first = false;
                    os_ << hp.key << ' ';
                    if (hp.is_string)
                        os_ << quote_string(hp.value);
                    else
                        os_ << hp.value;
                }
                os_ << ')';
            }
            os_ << '\n';
        }
        if (!da.training_results.empty()) {
            line_start();
            os_ << "training_results " << quote_string(da.training_results) << '\n';
        }
        if (da.blackbox_ml) {
            line_start();
            os_ << "blackbox_ml " << (*da.blackbox_ml ? "true" : "false") << '\n';
        }
        if (!da.blackbox_ml_model.empty()) {
            line_start();
            os_ << "blackbox_ml_model " << quote_string(da.blackbox_ml_model) << '\n';
        }
        if (!da.blackbox_import_algorithm.empty()) {
            line_start();
            os_ << "blackbox_import_algorithm " << quote_string(da.blackbox_import_algorithm)
                << '\n';
        }
        --indent_;
        line_start();
        os_ << "}\n";
    }

    void print_action_block(const char* intro, const std::vector<Action>& actions) {
        line_start();
        os_ << intro << " do\n";
        ++indent_;
        for (const auto& a : actions) print_action(a);
        --indent_;
        line_start();
        os_ << "end\n";
    }

    void print_statechart(const StateChart& sc) {
        line_start();
        os_ << "statechart ";
        if (!sc.name.empty()) os_ << sc.name << ' ';
        os_ << "init " << sc.initial << " {\n";
        ++indent_;
        if (!sc.on_entry.empty()) print_action_block("on entry", sc.on_entry);
        if (!sc.on_exit.empty()) print_action_block("on exit", sc.on_exit);
        for (const auto& st : sc.states) print_state(st);
        --indent_;
        line_start();
        os_ << "}\n";
    }

    void print_state(const State& st) {
        line_start();
        if (st.is_final) os_ << "final ";
        os_ << "state " << st.name << " {\n";
        ++indent_;
        if (!st.on_entry.empty()) print_action_block("on entry", st.on_entry);
        if (!st.on_exit.empty()) print_action_block("on exit", st.on_exit);
        for (const auto& tr : st.transitions) print_transition(tr);
        --indent_;
        line_start();
        os_ << "}\n";
    }

    void print_transition(const Transition& tr) {
        line_start();
        os_ << "transition -> " << tr.target;
        if (tr.event)
            os_ << " event " << tr.event->var << " : " << tr.event->port << '?'
                << tr.event->message;
        if (!tr.actions.empty()) {
            os_ << " action do\n";
            ++indent_;
            for (const auto& a : tr.actions) print_action(a);
            --indent_;
            line_start();
            os_ << "end\n";
        } else {
            os_ << '\n';
        }
    }

    void print_action(const Action& a) {
        if (const auto* pa = std::get_if<PrintAction>(&a.node)) {
            line_start();
            os_ << "print ";
            write_expr(os_, *pa->value, 0, false);
            os_ << '\n';
        } else if (const auto* as = std::get_if<AssignAction>(&a.node)) {
            line_start();
            os_ << as->property << " = ";
            write_expr(os_, *as->value, 0, false);
            os_ << '\n';
        } else if (const auto* sa = std::get_if<SendAction>(&a.node)) {
            line_start();
            os_ << sa->port << '!' << sa->message << '(';
            bool first = true;
            for (const auto& arg : sa->args) {
                if (!first) os_ << ", ";
                first = false;
                write_expr(os_, *arg, 0, false);
            }
            os_ << ")\n";
        } else if (const auto* ifa = std::get_if<IfAction>(&a.node)) {
            line_start();
            os_ << "if (";
            write_expr(os_, *ifa->condition, 0, false);
            os_ << ") do\n";
            ++indent_;
            for (const auto& t : ifa->then_actions) print_action(t);
            --indent_;
            line_start();
            if (ifa->has_else) {
                os_ << "end else do\n";
                ++indent_;
                for (const auto& t : ifa->else_actions) print_action(t);
                --indent_;
                line_start();
            }
            os_ << "end\n";
        } else if (const auto* daa = std::get_if<DaAction>(&a.node)) {
            line_start();
            os_ << da_action_keyword(daa->kind) << ' ' << daa->da;
            if (daa->kind == DaActionKind::Predict) {
                os_ << '(';
                bool first = true;
                for (const auto& arg : daa->args) {
                    if (!first) os_ << ", ";
                    first = false;
                    write_expr(os_, *arg, 0, false);
                }
                os_ << ')';
            }
            os_ << '\n';
        }
    }

    void print_configuration(const Configuration& c) {
        line_start();
        os_ << "configuration " << c.name;
        for (const auto& a : c.annotations) {
            os_ << ' ';
            write_annotation(a);
        }
        os_ << " {\n";
        ++indent_;
        for (const auto& inst : c.instances) {
            line_start();
            os_ << "instance " << inst.name << " : " << inst.thing << '\n';
        }
        for (const auto& con : c.connectors) {
            line_start();
            os_ << "connector " << con.from_instance << '.' << con.from_port << " => "
                << con.to_instance << '.' << con.to_port << '\n';
        }
        --indent_;
        line_start();
        os_ << "}\n";
    }
};

} // namespace

std::string quote_string(const std::string& value) {
    std::string out = "\"";
    for (char c : value) {
        switch (c) {
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        case '\r': out += "\\r"; break;
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        default: out += c; break;
        }
    }
    out += '"';
    return out;
}

std::string print_expr(const ast::Expr& expr) {
    std::ostringstream os;
    write_expr(os, expr, 0, false);
    return os.str();
}

std::string print_model(const ast::ModelUnit& model) { return Printer().print(model); }

} // namespace mlq
