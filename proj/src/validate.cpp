#include "mlq/validate.hpp"

#include <map>
#include <optional>
#include <set>

#include "mlq/ml/hyper.hpp"
#include "mlq/printer.hpp"

namespace mlq {

namespace {

using namespace ast;

// Inferred expression type. Numeric literals stay polymorphic inside their
// family until they meet a typed operand or a storage site.
struct ExprType {
    ValueType type;
    bool poly_int = false;   // integer literal that fits Int32
    bool poly_float = false; // float literal
};

bool int_side(const ExprType& t) { return is_int_type(t.type); }
bool float_side(const ExprType& t) { return is_float_type(t.type); }

bool same_numeric_family(const ExprType& a, const ExprType& b) {
    return (int_side(a) && int_side(b)) || (float_side(a) && float_side(b));
}

class Checker {
public:
    Checker(const ResolvedModel& model, std::vector<Diagnostic>& diags)
        : model_(model), diags_(diags), path_(model.source_path) {}

    void check_validity() {
        for (const auto& rt : model_.things) {
            rt_ = &rt;
            check_properties();
            check_analytics_validity();
            if (rt.chart) check_chart(*rt.chart);
        }
        check_connectors();
    }

    void check_completeness(const ValidateOptions& opts) {
        std::set<std::string> chartless;
        for (const auto& cfg : model_.configurations) {
            for (const auto& inst : cfg.instances) {
                if (inst.thing < 0) continue;
                const auto& t = model_.things[inst.thing];
                if (!t.chart && chartless.insert(t.name).second)
                    error({}, "C1",
                          "thing '" + t.name +
                              "' is instantiated but has no statechart with an initial state");
            }
        }
        for (const auto& rt : model_.things) {
            rt_ = &rt;
            for (const auto& da : rt.analytics) check_da_completeness(da);
            if (rt.chart) check_da_actions_exist(*rt.chart);
        }
        if (opts.require_configuration && model_.configurations.empty())
            error({}, "C6", "model declares no configuration to build or run");
    }

private:
    const ResolvedModel& model_;
    std::vector<Diagnostic>& diags_;
    const std::string& path_;
    const ResolvedThing* rt_ = nullptr;
    const Message* ev_msg_ = nullptr;
    const std::string* ev_var_ = nullptr;

    void error(Span span, const std::string& code, const std::string& msg) {
        diags_.push_back({code, Severity::Error, span, msg, path_});
    }
    void warn(Span span, const std::string& code, const std::string& msg) {
        diags_.push_back({code, Severity::Warning, span, msg, path_});
    }

    // ---- V1: expressions -------------------------------------------------

    std::optional<ExprType> infer(const Expr& e) {
        if (const auto* v = std::get_if<IntLit>(&e.node)) {
            constexpr long long lo = -2147483648LL, hi = 2147483647LL;
            if (v->value >= lo && v->value <= hi) return ExprType{ValueType::Int32, true, false};
            return ExprType{ValueType::Long, false, false};
        }
        if (std::get_if<FloatLit>(&e.node)) return ExprType{ValueType::Double, false, true};
        if (std::get_if<StringLit>(&e.node)) return ExprType{ValueType::String};
        if (std::get_if<BoolLit>(&e.node)) return ExprType{ValueType::Boolean};
        if (const auto* v = std::get_if<NameRef>(&e.node)) {
            int pi = rt_->property_index(v->name);
            if (pi < 0) return std::nullopt; // already a resolution error
            return ExprType{rt_->property_type(pi)};
        }
        if (const auto* v = std::get_if<ParamRef>(&e.node)) {
            if (!ev_msg_ || !ev_var_ || *ev_var_ != v->var) return std::nullopt;
            for (const auto& p : ev_msg_->params)
                if (p.name == v->param)
                    if (auto t = type_from_name(p.type)) return ExprType{*t};
            return std::nullopt;
        }
        if (const auto* v = std::get_if<Unary>(&e.node)) {
            auto t = infer(*v->operand);
            if (!t) return std::nullopt;
            if (v->op == UnaryOp::Not) {
                if (t->type != ValueType::Boolean) {
                    error(e.span, "V1", "operand of 'not' must be Boolean, got " +
                                            std::string(type_name(t->type)));
                    return std::nullopt;
                }
                return t;
            }
            if (!is_numeric_type(t->type)) {
                error(e.span, "V1", "operand of unary '-' must be numeric, got " +
                                        std::string(type_name(t->type)));
                return std::nullopt;
            }
            return t;
        }
        if (const auto* v = std::get_if<Binary>(&e.node)) return infer_binary(e.span, *v);
        return std::nullopt;
    }

    std::optional<ExprType> merge_numeric(Span span, const char* op, const ExprType& a,
                                          const ExprType& b) {
        if (!is_numeric_type(a.type) || !is_numeric_type(b.type) || !same_numeric_family(a, b)) {
            error(span, "V1", std::string("operands of '") + op + "' must be numeric and in " +
                                  "the same family, got " + type_name(a.type) + " and " +
                                  type_name(b.type));
            return std::nullopt;
        }
        ExprType out;
        if (a.poly_int && b.poly_int) {
            out = ExprType{ValueType::Int32, true, false};
        } else if (a.poly_float && b.poly_float) {
            out = ExprType{ValueType::Double, false, true};
        } else if (a.poly_int || a.poly_float) {
            out = ExprType{b.type};
        } else if (b.poly_int || b.poly_float) {
            out = ExprType{a.type};
        } else {
            out = ExprType{widen(a.type, b.type)};
        }
        return out;
    }

    std::optional<ExprType> infer_binary(Span span, const Binary& b) {
        auto lhs = infer(*b.lhs);
        auto rhs = infer(*b.rhs);
        if (!lhs || !rhs) return std::nullopt;
        const char* op = binary_op_text(b.op);
        switch (b.op) {
        case BinaryOp::Add:
            if (lhs->type == ValueType::String && rhs->type == ValueType::String)
                return ExprType{ValueType::String};
            [[fallthrough]];
        case BinaryOp::Sub:
        case BinaryOp::Mul:
        case BinaryOp::Div:
            return merge_numeric(span, op, *lhs, *rhs);
        case BinaryOp::Eq:
        case BinaryOp::Ne:
            if (lhs->type == ValueType::Boolean && rhs->type == ValueType::Boolean)
                return ExprType{ValueType::Boolean};
            if (lhs->type == ValueType::String && rhs->type == ValueType::String)
                return ExprType{ValueType::Boolean};
            if (merge_numeric(span, op, *lhs, *rhs)) return ExprType{ValueType::Boolean};
            return std::nullopt;
        case BinaryOp::Lt:
        case BinaryOp::Le:
        case BinaryOp::Gt:
        case BinaryOp::Ge:
            if (merge_numeric(span, op, *lhs, *rhs)) return ExprType{ValueType::Boolean};
            return std::nullopt;
        case BinaryOp::And:
        case BinaryOp::Or:
            if (lhs->type != ValueType::Boolean || rhs->type != ValueType::Boolean) {
                error(span, "V1", std::string("operands of '") + op + "' must be Boolean");
                return std::nullopt;
            }
            return ExprType{ValueType::Boolean};
        }
        return std::nullopt;
    }

    void check_assignable(Span span, ValueType target, const Expr& value, const std::string& what) {
        auto t = infer(value);
        if (!t) return;
        bool ok;
        if (t->poly_int) {
            ok = is_int_type(target);
        } else if (t->poly_float) {
            ok = is_float_type(target);
        } else {
            ok = assignable(target, t->type);
        }
        if (!ok)
            error(span, "V1", "cannot use a " + std::string(type_name(t->type)) + " value as " +
                                  type_name(target) + " in " + what);
    }

    void check_boolean(const Expr& e, const char* what) {
        auto t = infer(e);
        if (t && t->type != ValueType::Boolean)
            error(e.span, "V1", std::string(what) + " must be Boolean, got " +
                                    type_name(t->type));
    }

    // ---- properties / analytics declarations ------------------------------

    void check_properties() {
        for (const auto& p : rt_->properties) {
            auto t = type_from_name(p.type);
            if (!t) continue;
            if (p.init)
                check_assignable(p.span, *t, *p.init, "the initializer of '" + p.name + "'");
        }
    }

    void check_analytics_validity() {
        // V5: prediction storage type must suit the task
        for (const auto& da : rt_->analytics) {
            if (da.prediction_results.empty() ||
                rt_->property_index(da.prediction_results) < 0)
                continue; // C2 / R001 territory
            switch (da.task()) {
            case MlTask::Classification:
                if (da.prediction_type != da.label_type())
                    error(da.span, "V5",
                          "prediction_results '" + da.prediction_results + "' must have the " +
                              "label's type " + type_name(da.label_type()) +
                              " for classification, got " + type_name(da.prediction_type));
                break;
            case MlTask::Regression:
                if (!is_numeric_type(da.prediction_type))
                    error(da.span, "V5",
                          "prediction_results '" + da.prediction_results +
                              "' must be numeric for regression, got " +
                              type_name(da.prediction_type));
                break;
            case MlTask::Clustering:
                if (is_float_type(da.prediction_type)) {
                    error(da.span, "V5",
                          "prediction_results '" + da.prediction_results +
                              "' must hold a cluster id (integer, String or Boolean), got " +
                              type_name(da.prediction_type));
                } else if (da.prediction_type == ValueType::Boolean) {
                    auto hp = ml::resolve_hyperparams(da);
                    if (hp.k != 2)
                        error(da.span, "V5",
                              "Boolean prediction_results for clustering requires k = 2, got k = " +
                                  std::to_string(hp.k));
                }
                break;
            }
        }
        // shared prediction target across DA components of one thing
        std::map<std::string, const DataAnalyticsSpec*> seen;
        for (const auto& da : rt_->analytics) {
            if (da.prediction_results.empty()) continue;
            auto [it, inserted] = seen.emplace(da.prediction_results, &da);
            if (!inserted)
                warn(da.span, "W001",
                     "data_analytics '" + da.name + "' and '" + it->second->name +
                         "' both write prediction_results '" + da.prediction_results + "'");
        }
    }

    // ---- statechart --------------------------------------------------------

    void check_chart(const StateChart& sc) {
        for (const auto& st : sc.states) {
            int eventless = 0;
            std::map<std::pair<std::string, std::string>, int> per_event;
            for (const auto& tr : st.transitions) {
                if (tr.event) {
                    int n = ++per_event[{tr.event->port, tr.event->message}];
                    if (n == 2)
                        error(tr.span, "V2",
                              "state '" + st.name + "' has more than one transition for event " +
                                  tr.event->port + "?" + tr.event->message);
                } else {
                    if (++eventless == 2)
                        error(tr.span, "V2",
                              "state '" + st.name + "' has more than one eventless transition");
                }
                with_event(tr, [&] {
                    for (const auto& a : tr.actions) check_action(a);
                });
            }
            for (const auto& a : st.on_entry) check_action(a);
            for (const auto& a : st.on_exit) check_action(a);
        }
        for (const auto& a : sc.on_entry) check_action(a);
        for (const auto& a : sc.on_exit) check_action(a);
    }

    template <typename Fn>
    void with_event(const Transition& tr, Fn fn) {
        const Message* prev_msg = ev_msg_;
        const std::string* prev_var = ev_var_;
        if (tr.event) {
            int mi = rt_->message_index(tr.event->message);
            ev_msg_ = mi >= 0 ? &rt_->messages[mi] : nullptr;
            ev_var_ = &tr.event->var;
        }
        fn();
        ev_msg_ = prev_msg;
        ev_var_ = prev_var;
    }

    void check_action(const Action& a) {
        if (const auto* pa = std::get_if<PrintAction>(&a.node)) {
            infer(*pa->value);
        } else if (const auto* as = std::get_if<AssignAction>(&a.node)) {
            int pi = rt_->property_index(as->property);
            if (pi >= 0)
                check_assignable(a.span, rt_->property_type(pi), *as->value,
                                 "assignment to '" + as->property + "'");
        } else if (const auto* sa = std::get_if<SendAction>(&a.node)) {
            check_send(a.span, *sa);
        } else if (const auto* ia = std::get_if<IfAction>(&a.node)) {
            check_boolean(*ia->condition, "the condition of 'if'");
            for (const auto& t : ia->then_actions) check_action(t);
            for (const auto& t : ia->else_actions) check_action(t);
        } else if (const auto* daa = std::get_if<DaAction>(&a.node)) {
            if (daa->kind == DaActionKind::Predict) check_da_predict(a.span, *daa);
        }
    }

    void check_send(Span span, const SendAction& sa) {
        int pi = rt_->port_index(sa.port);
        int mi = rt_->message_index(sa.message);
        if (pi >= 0 && mi >= 0) {
            const auto& port = rt_->ports[pi];
            bool sendable = false;
            for (const auto& m : port.sends)
                if (m == sa.message) sendable = true;
            if (!sendable)
                error(span, "V3",
                      "message '" + sa.message + "' is not sendable on port '" + sa.port + "'");
        }
        if (mi >= 0) {
            const auto& msg = rt_->messages[mi];
            if (msg.params.size() != sa.args.size()) {
                error(span, "V1",
                      "message '" + sa.message + "' expects " +
                          std::to_string(msg.params.size()) + " argument(s), got " +
                          std::to_string(sa.args.size()));
            } else {
                for (std::size_t i = 0; i < sa.args.size(); ++i) {
                    if (auto t = type_from_name(msg.params[i].type))
                        check_assignable(sa.args[i]->span, *t, *sa.args[i],
                                         "parameter '" + msg.params[i].name + "' of message '" +
                                             sa.message + "'");
                }
            }
        } else {
            for (const auto& arg : sa.args) infer(*arg);
        }
    }

    void check_da_predict(Span span, const DaAction& daa) {
        int di = rt_->analytics_index(daa.da);
        if (di < 0) {
            for (const auto& arg : daa.args) infer(*arg);
            return; // C5 reports the missing component
        }
        const auto& da = rt_->analytics[di];
        std::size_t want = da.input_count();
        if (daa.args.size() != want) {
            error(span, "V4",
                  "da_predict " + daa.da + " expects " + std::to_string(want) +
                      " argument(s) matching its feature list, got " +
                      std::to_string(daa.args.size()));
            return;
        }
        for (std::size_t i = 0; i < want; ++i)
            check_assignable(daa.args[i]->span, da.features[i].type, *daa.args[i],
                             "feature '" + da.features[i].name + "' of '" + daa.da + "'");
    }

    // ---- V6: connectors ----------------------------------------------------

    void check_connectors() {
        for (const auto& cfg : model_.configurations) {
            for (const auto& con : cfg.connectors) {
                if (con.from_instance < 0 || con.to_instance < 0 || con.from_port < 0 ||
                    con.to_port < 0)
                    continue; // resolution already failed
                const auto& from_thing = model_.things[cfg.instances[con.from_instance].thing];
                const auto& to_thing = model_.things[cfg.instances[con.to_instance].thing];
                const auto& a = from_thing.ports[con.from_port];
                const auto& b = to_thing.ports[con.to_port];
                std::string where = "connector " + cfg.instances[con.from_instance].name + "." +
                                    a.name + " => " + cfg.instances[con.to_instance].name + "." +
                                    b.name;
                if (a.provided == b.provided) {
                    error({}, "V6",
                          where + " must join a required port to a provided port");
                    continue;
                }
                check_message_flow(where, a, b);
                check_message_flow(where, b, a);
            }
        }
    }

    void check_message_flow(const std::string& where, const ast::Port& sender,
                            const ast::Port& receiver) {
        for (const auto& m : sender.sends) {
            bool ok = false;
            for (const auto& r : receiver.receives)
                if (r == m) ok = true;
            if (!ok)
                error({}, "V6",
                      where + ": message '" + m + "' sent by port '" + sender.name +
                          "' is not receivable on port '" + receiver.name + "'");
        }
    }

    // ---- completeness ------------------------------------------------------

    void check_da_completeness(const DataAnalyticsSpec& da) {
        if (da.dataset.empty())
            error(da.span, "C2", "data_analytics '" + da.name + "' has no dataset path");
        if (da.features.empty())
            error(da.span, "C2", "data_analytics '" + da.name + "' has an empty feature list");
        if (da.prediction_results.empty())
            error(da.span, "C2",
                  "data_analytics '" + da.name + "' names no prediction_results property");
        if (da.blackbox) {
            if (da.blackbox_model_path.empty())
                error(da.span, "C4",
                      "black-box data_analytics '" + da.name + "' needs blackbox_ml_model");
            if (da.blackbox_algorithm.empty())
                error(da.span, "C4",
                      "black-box data_analytics '" + da.name +
                          "' needs blackbox_import_algorithm");
            else if (!family_from_name(da.blackbox_algorithm))
                error(da.span, "C4",
                      "blackbox_import_algorithm '" + da.blackbox_algorithm +
                          "' is not a known algorithm");
            if (!da.algorithm_name.empty())
                error(da.span, "C4",
                      "black-box data_analytics '" + da.name + "' must not set model_algorithm");
            if (!da.training_results.empty())
                error(da.span, "C4",
                      "black-box data_analytics '" + da.name + "' must not set training_results");
        } else {
            if (!da.family) {
                if (da.algorithm_name.empty())
                    error(da.span, "C3",
                          "data_analytics '" + da.name + "' declares no model_algorithm");
                // unknown family spelling was already an R001
                return;
            }
            check_family_task(da);
            std::vector<Diagnostic> hp_diags;
            ml::resolve_hyperparams(da, &hp_diags, path_);
            for (auto& d : hp_diags) diags_.push_back(std::move(d));
        }
    }

    void check_family_task(const DataAnalyticsSpec& da) {
        MlTask task = da.task();
        MlFamily fam = *da.family;
        auto fail = [&](const char* need) {
            error(da.span, "C3",
                  std::string(family_name(fam)) + " performs " + need + ", but '" + da.name +
                      "' describes a " + task_name(task) + " task");
        };
        switch (fam) {
        case MlFamily::LinearRegression:
            if (task != MlTask::Regression) fail("regression");
            break;
        case MlFamily::LogisticRegression:
        case MlFamily::GaussianNaiveBayes:
        case MlFamily::DecisionTreeClassifier:
            if (task != MlTask::Classification) fail("classification");
            break;
        case MlFamily::MultilayerPerceptron:
            if (task == MlTask::Clustering) fail("supervised learning");
            break;
        case MlFamily::KMeans:
            if (task != MlTask::Clustering) fail("clustering");
            break;
        }
    }

    void check_da_actions_exist(const StateChart& sc) {
        auto walk = [&](const Action& a, auto&& self) -> void {
            if (const auto* daa = std::get_if<DaAction>(&a.node)) {
                int di = rt_->analytics_index(daa->da);
                if (di < 0) {
                    error(a.span, "C5",
                          std::string(da_action_keyword(daa->kind)) +
                              " refers to unknown data_analytics '" + daa->da + "'");
                } else if (rt_->analytics[di].blackbox &&
                           (daa->kind == DaActionKind::Train ||
                            daa->kind == DaActionKind::Preprocess)) {
                    error(a.span, "C4",
                          std::string(da_action_keyword(daa->kind)) +
                              " is not allowed on black-box data_analytics '" + daa->da + "'");
                }
            } else if (const auto* ia = std::get_if<IfAction>(&a.node)) {
                for (const auto& t : ia->then_actions) self(t, self);
                for (const auto& t : ia->else_actions) self(t, self);
            }
        };
        auto walk_all = [&](const std::vector<Action>& as) {
            for (const auto& a : as) walk(a, walk);
        };
        walk_all(sc.on_entry);
        walk_all(sc.on_exit);
        for (const auto& st : sc.states) {
            walk_all(st.on_entry);
            walk_all(st.on_exit);
            for (const auto& tr : st.transitions) walk_all(tr.actions);
        }
    }
};

} // namespace

std::vector<Diagnostic> check_valid(const ResolvedModel& model) {
    std::vector<Diagnostic> diags;
    Checker(model, diags).check_validity();
    sort_diagnostics(diags);
    return diags;
}

std::vector<Diagnostic> check_complete(const ResolvedModel& model, const ValidateOptions& opts) {
    std::vector<Diagnostic> diags;
    Checker(model, diags).check_completeness(opts);
    sort_diagnostics(diags);
    return diags;
}

std::vector<Diagnostic> apply_automl_defaults(ResolvedModel& model) {
    std::vector<Diagnostic> notes;
    for (auto& rt : model.things) {
        for (auto& da : rt.analytics) {
            if (!da.automl) continue;
            auto note = [&](const std::string& msg) {
                notes.push_back({"N001", Severity::Note, da.span,
                                 "data_analytics '" + da.name + "': " + msg,
                                 model.source_path});
            };
            if (!da.sequential.has_value() && da.timestamps) {
                da.sequential = true;
                da.sequential_defaulted = true;
                note("sequential defaulted to TRUE because the dataset is timestamped");
            }
            if (da.scaler == ScalerKind::Unset && da.family &&
                (*da.family == MlFamily::MultilayerPerceptron ||
                 *da.family == MlFamily::LogisticRegression ||
                 *da.family == MlFamily::KMeans)) {
                da.scaler = ScalerKind::Standard;
                da.scaler_defaulted = true;
                note("preprocess_feature_scaler defaulted to StandardScaler for " +
                     std::string(family_name(*da.family)));
            }
            if (da.dalib.empty() || da.dalib == "auto") {
                da.dalib = "builtin";
                da.dalib_defaulted = true;
                note("analytics engine defaulted to the built-in implementation");
            }
        }
    }
    sort_diagnostics(notes);
    return notes;
}

} // namespace mlq
