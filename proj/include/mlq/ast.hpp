#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mlq/diag.hpp"

// Source-faithful syntax tree. Node spans point back into the original text;
// everything else is normalized just enough for later passes (string literals
// are decoded, numeric literals carry parsed values).
namespace mlq::ast {

// ---- expressions ----------------------------------------------------------

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

enum class BinaryOp { Add, Sub, Mul, Div, Eq, Ne, Lt, Le, Gt, Ge, And, Or };
enum class UnaryOp { Neg, Not };

const char* binary_op_text(BinaryOp op);

struct IntLit {
    long long value = 0;
};
struct FloatLit {
    double value = 0.0;
};
struct StringLit {
    std::string value; // decoded (escapes resolved)
};
struct BoolLit {
    bool value = false;
};
struct NameRef { // property read, or bare enum-like word in expressions
    std::string name;
};
struct ParamRef { // event-variable parameter access: m.client_code
    std::string var;
    std::string param;
};
struct Unary {
    UnaryOp op;
    ExprPtr operand;
};
struct Binary {
    BinaryOp op;
    ExprPtr lhs;
    ExprPtr rhs;
};

struct Expr {
    Span span;
    std::variant<IntLit, FloatLit, StringLit, BoolLit, NameRef, ParamRef, Unary, Binary> node;
};

// ---- actions ---------------------------------------------------------------

struct Action;

struct PrintAction {
    ExprPtr value;
};
struct AssignAction {
    std::string property;
    ExprPtr value;
};
struct SendAction {
    std::string port;
    std::string message;
    std::vector<ExprPtr> args;
};
struct IfAction {
    ExprPtr condition;
    std::vector<Action> then_actions;
    std::vector<Action> else_actions;
    bool has_else = false;
};

enum class DaActionKind { Preprocess, Train, Predict, Save };
const char* da_action_keyword(DaActionKind k);

struct DaAction {
    DaActionKind kind;
    std::string da;
    std::vector<ExprPtr> args; // only da_predict takes arguments
};

struct Action {
    Span span;
    std::variant<PrintAction, AssignAction, SendAction, IfAction, DaAction> node;
};

// ---- thing members ---------------------------------------------------------

struct Annotation {
    std::string key; // without the '@'
    std::string value;
    Span span;
};

struct Port {
    std::string name;
    bool provided = true; // false => required
    std::vector<std::string> receives;
    std::vector<std::string> sends;
    Span span;
};

struct Param {
    std::string name;
    std::string type;
    Span span;
};

struct Message {
    std::string name;
    std::vector<Param> params;
    Span span;
};

struct Property {
    std::string name;
    std::string type;
    std::optional<Expr> init;
    Span span;
};

struct HyperParam {
    std::string key;
    std::string value; // lexeme for words/numbers, decoded for strings
    bool is_string = false;
    Span span;
};

struct ModelAlgorithm {
    std::string family;   // e.g. nn_multilayer_perceptron
    std::string instance; // model instance name
    std::vector<HyperParam> params;
    Span span;
};

struct DataAnalytics {
    std::string name;
    std::vector<Annotation> annotations; // e.g. @dalib "scikit-learn"
    std::optional<bool> labels;          // ON / OFF
    std::vector<std::string> features;
    std::string prediction_results;
    std::string dataset;
    std::optional<bool> automl;     // ON / OFF
    std::optional<bool> sequential; // TRUE / FALSE
    std::optional<bool> timestamps; // ON / OFF
    std::string scaler;             // StandardScaler | MinMaxScaler | none | ""
    std::optional<ModelAlgorithm> algorithm;
    std::string training_results;
    std::optional<bool> blackbox_ml;
    std::string blackbox_ml_model;
    std::string blackbox_import_algorithm;
    Span span;
};

struct EventClause {
    std::string var;
    std::string port;
    std::string message;
    Span span;
};

struct Transition {
    std::string target;
    std::optional<EventClause> event;
    std::vector<Action> actions;
    Span span;
};

struct State {
    std::string name;
    bool is_final = false;
    std::vector<Action> on_entry;
    std::vector<Action> on_exit;
    std::vector<Transition> transitions;
    Span span;
};

struct StateChart {
    std::string name; // optional in the concrete syntax
    std::string initial;
    std::vector<Action> on_entry;
    std::vector<Action> on_exit;
    std::vector<State> states;
    Span span;
};

struct Thing {
    std::string name;
    bool is_fragment = false;
    std::vector<std::string> includes;
    std::vector<Annotation> annotations;
    std::vector<Port> ports;
    std::vector<Message> messages;
    std::vector<Property> properties;
    std::vector<DataAnalytics> analytics;
    std::vector<StateChart> statecharts;
    Span span;
};

// ---- configuration ---------------------------------------------------------

struct Instance {
    std::string name;
    std::string thing;
    Span span;
};

struct Connector {
    std::string from_instance;
    std::string from_port;
    std::string to_instance;
    std::string to_port;
    Span span;
};

struct Configuration {
    std::string name;
    std::vector<Annotation> annotations;
    std::vector<Instance> instances;
    std::vector<Connector> connectors;
    Span span;
};

struct ModelUnit {
    std::vector<Annotation> annotations; // file-level
    std::vector<Thing> things;
    std::vector<Configuration> configurations;
    std::string source_path;
};

// Deep copies (expression/action nodes hold unique_ptr children, so the
// containing types are move-only and need explicit cloning).
Expr clone_expr(const Expr& e);
Action clone_action(const Action& a);
std::vector<Action> clone_actions(const std::vector<Action>& as);
Property clone_property(const Property& p);
Transition clone_transition(const Transition& t);
State clone_state(const State& s);
StateChart clone_statechart(const StateChart& sc);

} // namespace mlq::ast
