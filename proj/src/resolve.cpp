#include "mlq/resolve.hpp"

#include <map>
#include <set>

#include "mlq/printer.hpp"

namespace mlq {

// ---- index helpers ----------------------------------------------------------

namespace {
template <typename Seq>
int find_by_name(const Seq& seq, std::string_view n) {
    for (std::size_t i = 0; i < seq.size(); ++i)
        if (seq[i].name == n) return static_cast<int>(i);
    return -1;
}
} // namespace

int ResolvedThing::port_index(std::string_view n) const { return find_by_name(ports, n); }
int ResolvedThing::message_index(std::string_view n) const { return find_by_name(messages, n); }
int ResolvedThing::property_index(std::string_view n) const { return find_by_name(properties, n); }
int ResolvedThing::analytics_index(std::string_view n) const { return find_by_name(analytics, n); }
int ResolvedThing::state_index(std::string_view n) const {
    if (!chart) return -1;
    return find_by_name(chart->states, n);
}
ValueType ResolvedThing::property_type(int index) const {
    return *type_from_name(properties[static_cast<std::size_t>(index)].type);
}

int ResolvedConfiguration::instance_index(std::string_view n) const {
    return find_by_name(instances, n);
}
int ResolvedModel::thing_index(std::string_view n) const { return find_by_name(things, n); }
int ResolvedModel::configuration_index(std::string_view n) const {
    return find_by_name(configurations, n);
}

namespace {

const char* family_spelling[] = {
    "linear_regression",          "logistic_regression",
    "gaussian_naive_bayes",       "decision_tree_classifier",
    "nn_multilayer_perceptron",   "k_means",
};

} // namespace

const char* family_name(MlFamily f) { return family_spelling[static_cast<int>(f)]; }

std::optional<MlFamily> family_from_name(std::string_view name) {
    for (int i = 0; i < 6; ++i)
        if (name == family_spelling[i]) return static_cast<MlFamily>(i);
    return std::nullopt;
}

const char* task_name(MlTask t) {
    switch (t) {
    case MlTask::Regression: return "regression";
    case MlTask::Classification: return "classification";
    case MlTask::Clustering: return "clustering";
    }
    return "?";
}

const char* scaler_name(ScalerKind s) {
    switch (s) {
    case ScalerKind::Unset: return "";
    case ScalerKind::None: return "none";
    case ScalerKind::Standard: return "StandardScaler";
    case ScalerKind::MinMax: return "MinMaxScaler";
    }
    return "";
}

std::optional<ScalerKind> scaler_from_name(std::string_view name) {
    if (name == "none") return ScalerKind::None;
    if (name == "StandardScaler") return ScalerKind::Standard;
    if (name == "MinMaxScaler") return ScalerKind::MinMax;
    return std::nullopt;
}

// ---- resolution --------------------------------------------------------------

namespace {

using namespace ast;

class Resolver {
public:
    explicit Resolver(const ModelUnit& unit) : unit_(unit) {}

    ResolveResult run() {
        ResolveResult out;
        index_things();
        for (const auto& t : unit_.things) {
            if (t.is_fragment) continue;
            out.model.things.push_back(flatten_thing(t));
        }
        for (auto& rt : out.model.things) bind_thing(rt);
        for (const auto& c : unit_.configurations)
            out.model.configurations.push_back(resolve_configuration(c, out.model));
        out.model.annotations = unit_.annotations;
        out.model.source_path = unit_.source_path;
        sort_diagnostics(diags_);
        out.diagnostics = std::move(diags_);
        return out;
    }

private:
    const ModelUnit& unit_;
    std::vector<Diagnostic> diags_;
    std::map<std::string, const Thing*> by_name_;

    void error(Span span, const std::string& code, const std::string& msg) {
        diags_.push_back({code, Severity::Error, span, msg, unit_.source_path});
    }

    void index_things() {
        for (const auto& t : unit_.things) {
            auto [it, inserted] = by_name_.emplace(t.name, &t);
            if (!inserted)
                error(t.span, "R002", "duplicate thing name '" + t.name + "'");
        }
    }

    // Depth-first include flattening. Members of included fragments come
    // first (in include order), then the thing's own members.
    void merge_into(ResolvedThing& out, const Thing& t, std::vector<const Thing*>& chain,
                    std::set<const Thing*>& merged) {
        if (merged.count(&t)) return; // diamond includes merge once
        for (const Thing* anc : chain) {
            if (anc == &t) {
                error(t.span, "R003", "include cycle through '" + t.name + "'");
                return;
            }
        }
        chain.push_back(&t);
        for (const auto& inc : t.includes) {
            auto it = by_name_.find(inc);
            if (it == by_name_.end()) {
                error(t.span, "R001", "unknown include '" + inc + "' in thing '" + t.name + "'");
                continue;
            }
            merge_into(out, *it->second, chain, merged);
        }
        chain.pop_back();
        merged.insert(&t);

        for (const auto& a : t.annotations) out.annotations.push_back(a);
        for (const auto& p : t.ports) {
            if (find_by_name(out.ports, p.name) >= 0)
                error(p.span, "R002", "duplicate port '" + p.name + "' in thing '" + out.name + "'");
            else
                out.ports.push_back(p);
        }
        for (const auto& m : t.messages) {
            if (find_by_name(out.messages, m.name) >= 0)
                error(m.span, "R002",
                      "duplicate message '" + m.name + "' in thing '" + out.name + "'");
            else
                out.messages.push_back(m);
        }
        for (const auto& p : t.properties) {
            if (find_by_name(out.properties, p.name) >= 0)
                error(p.span, "R002",
                      "duplicate property '" + p.name + "' in thing '" + out.name + "'");
            else
                out.properties.push_back(clone_property(p));
        }
        for (const auto& da : t.analytics) {
            if (find_by_name(out.analytics, da.name) >= 0)
                error(da.span, "R002",
                      "duplicate data_analytics '" + da.name + "' in thing '" + out.name + "'");
            else
                out.analytics.push_back(normalize_da(da, out.name));
        }
        for (const auto& sc : t.statecharts) {
            if (out.chart)
                error(sc.span, "R005", "thing '" + out.name + "' has more than one statechart");
            else
                out.chart = clone_statechart(sc);
        }
    }

    ResolvedThing flatten_thing(const Thing& t) {
        ResolvedThing out;
        out.name = t.name;
        std::vector<const Thing*> chain;
        std::set<const Thing*> merged;
        merge_into(out, t, chain, merged);
        return out;
    }

    DataAnalyticsSpec normalize_da(const DataAnalytics& da, const std::string& thing) {
        DataAnalyticsSpec spec;
        spec.name = da.name;
        spec.thing = thing;
        spec.span = da.span;
        for (const auto& a : da.annotations) {
            if (a.key == "dalib")
                spec.dalib = a.value;
            else
                spec.other_annotations.push_back(a);
        }
        spec.labels = da.labels.value_or(false);
        for (const auto& f : da.features)
            spec.features.push_back({f, ValueType::Double}); // types bound later
        spec.prediction_results = da.prediction_results;
        spec.dataset = da.dataset;
        spec.automl = da.automl.value_or(false);
        spec.sequential = da.sequential;
        spec.timestamps = da.timestamps.value_or(false);
        if (!da.scaler.empty()) {
            if (auto s = scaler_from_name(da.scaler)) {
                spec.scaler = *s;
            } else {
                error(da.span, "R001", "unknown feature scaler '" + da.scaler + "'");
            }
        }
        if (da.algorithm) {
            spec.algorithm_name = da.algorithm->family;
            spec.model_instance = da.algorithm->instance;
            spec.hyperparams = da.algorithm->params;
            spec.family = family_from_name(da.algorithm->family);
            if (!spec.family)
                error(da.algorithm->span, "R001",
                      "unknown model algorithm '" + da.algorithm->family + "'");
        }
        spec.training_results = da.training_results;
        spec.blackbox = da.blackbox_ml.value_or(false);
        spec.blackbox_model_path = da.blackbox_ml_model;
        spec.blackbox_algorithm = da.blackbox_import_algorithm;
        return spec;
    }

    // ---- name binding inside one thing ------------------------------------

    void bind_thing(ResolvedThing& rt) {
        for (const auto& port : rt.ports) {
            for (const auto& m : port.receives)
                if (rt.message_index(m) < 0)
                    error(port.span, "R001",
                          "port '" + port.name + "' receives unknown message '" + m + "'");
            for (const auto& m : port.sends)
                if (rt.message_index(m) < 0)
                    error(port.span, "R001",
                          "port '" + port.name + "' sends unknown message '" + m + "'");
        }
        for (auto& p : rt.properties) {
            if (!type_from_name(p.type))
                error(p.span, "R001", "unknown type '" + p.type + "'");
            if (p.init) bind_expr(rt, *p.init, nullptr, nullptr);
        }
        for (auto& da : rt.analytics) bind_da(rt, da);
        if (rt.chart) bind_chart(rt, *rt.chart);
    }

    void bind_da(ResolvedThing& rt, DataAnalyticsSpec& da) {
        for (auto& f : da.features) {
            int pi = rt.property_index(f.name);
            if (pi < 0) {
                error(da.span, "R001",
                      "data_analytics '" + da.name + "' feature '" + f.name +
                          "' is not a property of thing '" + rt.name + "'");
            } else if (auto t = type_from_name(rt.properties[pi].type)) {
                f.type = *t;
            }
        }
        if (!da.prediction_results.empty()) {
            int pi = rt.property_index(da.prediction_results);
            if (pi < 0) {
                error(da.span, "R001",
                      "data_analytics '" + da.name + "' prediction_results '" +
                          da.prediction_results + "' is not a property of thing '" + rt.name +
                          "'");
            } else if (auto t = type_from_name(rt.properties[pi].type)) {
                da.prediction_type = *t;
            }
        }
    }

    void bind_chart(ResolvedThing& rt, StateChart& sc) {
        if (rt.state_index(sc.initial) < 0)
            error(sc.span, "R001",
                  "initial state '" + sc.initial + "' is not a state of the chart");
        for (auto& st : sc.states) {
            for (auto& tr : st.transitions) {
                if (rt.state_index(tr.target) < 0)
                    error(tr.span, "R001",
                          "transition target '" + tr.target + "' is not a state of the chart");
                const Message* ev_msg = nullptr;
                if (tr.event) {
                    int pi = rt.port_index(tr.event->port);
                    if (pi < 0) {
                        error(tr.event->span, "R001",
                              "unknown port '" + tr.event->port + "'");
                    } else {
                        const auto& port = rt.ports[pi];
                        bool receivable = false;
                        for (const auto& m : port.receives)
                            if (m == tr.event->message) receivable = true;
                        if (!receivable)
                            error(tr.event->span, "R001",
                                  "message '" + tr.event->message + "' is not receivable on port '" +
                                      tr.event->port + "'");
                    }
                    int mi = rt.message_index(tr.event->message);
                    if (mi >= 0) ev_msg = &rt.messages[mi];
                }
                const std::string* ev_var = tr.event ? &tr.event->var : nullptr;
                for (auto& a : tr.actions)
                    bind_action(rt, a, ev_var, ev_msg);
            }
            for (auto& a : st.on_entry) bind_action(rt, a, nullptr, nullptr);
            for (auto& a : st.on_exit) bind_action(rt, a, nullptr, nullptr);
        }
        for (auto& a : sc.on_entry) bind_action(rt, a, nullptr, nullptr);
        for (auto& a : sc.on_exit) bind_action(rt, a, nullptr, nullptr);
    }

    void bind_action(ResolvedThing& rt, Action& a, const std::string* ev_var,
                     const Message* ev_msg) {
        if (auto* pa = std::get_if<PrintAction>(&a.node)) {
            bind_expr(rt, *pa->value, ev_var, ev_msg);
        } else if (auto* as = std::get_if<AssignAction>(&a.node)) {
            if (rt.property_index(as->property) < 0)
                error(a.span, "R001",
                      "assignment to unknown property '" + as->property + "'");
            bind_expr(rt, *as->value, ev_var, ev_msg);
        } else if (auto* sa = std::get_if<SendAction>(&a.node)) {
            if (rt.port_index(sa->port) < 0)
                error(a.span, "R001", "send on unknown port '" + sa->port + "'");
            if (rt.message_index(sa->message) < 0)
                error(a.span, "R001", "send of unknown message '" + sa->message + "'");
            for (auto& arg : sa->args) bind_expr(rt, *arg, ev_var, ev_msg);
        } else if (auto* ia = std::get_if<IfAction>(&a.node)) {
            bind_expr(rt, *ia->condition, ev_var, ev_msg);
            for (auto& t : ia->then_actions) bind_action(rt, t, ev_var, ev_msg);
            for (auto& t : ia->else_actions) bind_action(rt, t, ev_var, ev_msg);
        } else if (auto* daa = std::get_if<DaAction>(&a.node)) {
            // existence of the DA component is a completeness question, not a
            // resolution error; arguments still get bound
            for (auto& arg : daa->args) bind_expr(rt, *arg, ev_var, ev_msg);
        }
    }

    void bind_expr(ResolvedThing& rt, Expr& e, const std::string* ev_var,
                   const Message* ev_msg) {
        if (auto* nr = std::get_if<NameRef>(&e.node)) {
            if (rt.property_index(nr->name) < 0)
                error(e.span, "R001", "unknown property '" + nr->name + "'");
        } else if (auto* pr = std::get_if<ParamRef>(&e.node)) {
            if (!ev_var || *ev_var != pr->var) {
                error(e.span, "R001",
                      "'" + pr->var + "' is not the event variable of this transition");
            } else if (ev_msg) {
                if (find_by_name(ev_msg->params, pr->param) < 0)
                    error(e.span, "R001",
                          "message '" + ev_msg->name + "' has no parameter '" + pr->param + "'");
            }
        } else if (auto* u = std::get_if<Unary>(&e.node)) {
            bind_expr(rt, *u->operand, ev_var, ev_msg);
        } else if (auto* b = std::get_if<Binary>(&e.node)) {
            bind_expr(rt, *b->lhs, ev_var, ev_msg);
            bind_expr(rt, *b->rhs, ev_var, ev_msg);
        }
    }

    // ---- configurations -----------------------------------------------------

    ResolvedConfiguration resolve_configuration(const Configuration& c,
                                                const ResolvedModel& model) {
        ResolvedConfiguration out;
        out.name = c.name;
        out.annotations = c.annotations;
        for (const auto& inst : c.instances) {
            ResolvedInstance ri;
            ri.name = inst.name;
            if (out.instance_index(inst.name) >= 0)
                error(inst.span, "R002", "duplicate instance name '" + inst.name + "'");
            auto it = by_name_.find(inst.thing);
            if (it == by_name_.end()) {
                error(inst.span, "R001", "unknown thing '" + inst.thing + "'");
            } else if (it->second->is_fragment) {
                error(inst.span, "R004",
                      "cannot instantiate fragment '" + inst.thing + "'");
            } else {
                ri.thing = model.thing_index(inst.thing);
            }
            out.instances.push_back(ri);
        }
        for (const auto& con : c.connectors) {
            ResolvedConnector rc;
            rc.from_instance = out.instance_index(con.from_instance);
            rc.to_instance = out.instance_index(con.to_instance);
            if (rc.from_instance < 0)
                error(con.span, "R001", "unknown instance '" + con.from_instance + "'");
            if (rc.to_instance < 0)
                error(con.span, "R001", "unknown instance '" + con.to_instance + "'");
            if (rc.from_instance >= 0) {
                int ti = out.instances[rc.from_instance].thing;
                if (ti >= 0) {
                    rc.from_port = model.things[ti].port_index(con.from_port);
                    if (rc.from_port < 0)
                        error(con.span, "R001",
                              "thing instance '" + con.from_instance + "' has no port '" +
                                  con.from_port + "'");
                }
            }
            if (rc.to_instance >= 0) {
                int ti = out.instances[rc.to_instance].thing;
                if (ti >= 0) {
                    rc.to_port = model.things[ti].port_index(con.to_port);
                    if (rc.to_port < 0)
                        error(con.span, "R001",
                              "thing instance '" + con.to_instance + "' has no port '" +
                                  con.to_port + "'");
                }
            }
            out.connectors.push_back(rc);
        }
        return out;
    }
};

} // namespace

ResolveResult resolve(const ast::ModelUnit& unit) { return Resolver(unit).run(); }

// ---- emit ---------------------------------------------------------------------

std::string emit_resolved(const ResolvedModel& model) {
    ast::ModelUnit unit;
    unit.annotations = model.annotations;
    for (const auto& rt : model.things) {
        ast::Thing t;
        t.name = rt.name;
        t.annotations = rt.annotations;
        t.ports = rt.ports;
        t.messages = rt.messages;
        for (const auto& p : rt.properties) t.properties.push_back(ast::clone_property(p));
        for (const auto& da : rt.analytics) {
            ast::DataAnalytics d;
            d.name = da.name;
            if (!da.dalib.empty()) d.annotations.push_back({"dalib", da.dalib, {}});
            for (const auto& a : da.other_annotations) d.annotations.push_back(a);
            d.labels = da.labels;
            for (const auto& f : da.features) d.features.push_back(f.name);
            d.prediction_results = da.prediction_results;
            d.dataset = da.dataset;
            d.automl = da.automl;
            d.sequential = da.sequential;
            d.timestamps = da.timestamps;
            d.scaler = scaler_name(da.scaler);
            if (!da.algorithm_name.empty()) {
                ast::ModelAlgorithm alg;
                alg.family = da.algorithm_name;
                alg.instance = da.model_instance;
                alg.params = da.hyperparams;
                d.algorithm = std::move(alg);
            }
            d.training_results = da.training_results;
            if (da.blackbox) d.blackbox_ml = true;
            d.blackbox_ml_model = da.blackbox_model_path;
            d.blackbox_import_algorithm = da.blackbox_algorithm;
            t.analytics.push_back(std::move(d));
        }
        if (rt.chart) t.statecharts.push_back(ast::clone_statechart(*rt.chart));
        unit.things.push_back(std::move(t));
    }
    for (const auto& rc : model.configurations) {
        ast::Configuration c;
        c.name = rc.name;
        c.annotations = rc.annotations;
        for (const auto& inst : rc.instances) {
            const std::string thing =
                inst.thing >= 0 ? model.things[inst.thing].name : std::string("?");
            c.instances.push_back({inst.name, thing, {}});
        }
        for (const auto& con : rc.connectors) {
            ast::Connector out;
            if (con.from_instance >= 0) {
                out.from_instance = rc.instances[con.from_instance].name;
                int ti = rc.instances[con.from_instance].thing;
                if (ti >= 0 && con.from_port >= 0)
                    out.from_port = model.things[ti].ports[con.from_port].name;
            }
            if (con.to_instance >= 0) {
                out.to_instance = rc.instances[con.to_instance].name;
                int ti = rc.instances[con.to_instance].thing;
                if (ti >= 0 && con.to_port >= 0)
                    out.to_port = model.things[ti].ports[con.to_port].name;
            }
            c.connectors.push_back(out);
        }
        unit.configurations.push_back(std::move(c));
    }
    return print_model(unit);
}

} // namespace mlq
