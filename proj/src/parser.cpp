#include "mlq/parser.hpp"

#include <cstdlib>
#include <utility>

#include "mlq/lexer.hpp"

namespace mlq {

namespace {

using namespace ast;

class Parser {
public:
    Parser(std::vector<Token> tokens, std::string path, std::vector<Diagnostic> diags)
        : toks_(std::move(tokens)), path_(std::move(path)), diags_(std::move(diags)) {}

    ParseResult run() {
        ModelUnit unit;
        unit.source_path = path_;
        while (!at_end()) {
            if (at_annotation()) {
                unit.annotations.push_back(parse_annotation());
            } else if (at_kw("thing")) {
                unit.things.push_back(parse_thing());
            } else if (at_kw("configuration")) {
                unit.configurations.push_back(parse_configuration());
            } else {
                error_here("P001", "expected 'thing' or 'configuration'");
                recover_top_level();
            }
        }
        ParseResult out;
        out.model = std::move(unit);
        sort_diagnostics(diags_);
        out.diagnostics = std::move(diags_);
        return out;
    }

private:
    std::vector<Token> toks_;
    std::string path_;
    std::vector<Diagnostic> diags_;
    std::size_t pos_ = 0;

    // ---- token helpers -----------------------------------------------------

    const Token& cur() const { return toks_[pos_]; }
    const Token& ahead(std::size_t n) const {
        std::size_t i = pos_ + n;
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    bool at_end() const { return cur().kind == TokenKind::EndOfInput; }
    void bump() {
        if (!at_end()) ++pos_;
    }

    bool at_kw(std::string_view kw) const {
        return cur().kind == TokenKind::Keyword && cur().lexeme == kw;
    }
    bool at_punct(std::string_view p) const {
        return cur().kind == TokenKind::Punctuation && cur().lexeme == p;
    }
    bool at_annotation() const { return cur().kind == TokenKind::AnnotationMarker; }

    bool eat_kw(std::string_view kw) {
        if (!at_kw(kw)) return false;
        bump();
        return true;
    }
    bool eat_punct(std::string_view p) {
        if (!at_punct(p)) return false;
        bump();
        return true;
    }

    void error_here(const std::string& code, const std::string& message) {
        diags_.push_back({code, Severity::Error, cur().span, message, path_});
    }

    void expect_kw(std::string_view kw) {
        if (!eat_kw(kw))
            error_here("P001", "expected '" + std::string(kw) + "', found " + describe(cur()));
    }
    void expect_punct(std::string_view p) {
        if (!eat_punct(p))
            error_here("P001", "expected '" + std::string(p) + "', found " + describe(cur()));
    }

    static std::string describe(const Token& t) {
        if (t.kind == TokenKind::EndOfInput) return "end of input";
        return std::string(token_kind_name(t.kind)) + " '" + t.lexeme + "'";
    }

    std::string expect_identifier(const char* what) {
        if (cur().kind == TokenKind::Identifier) {
            std::string name = cur().lexeme;
            bump();
            return name;
        }
        error_here("P001", std::string("expected ") + what + ", found " + describe(cur()));
        return "";
    }

    std::string expect_string(const char* what) {
        if (cur().kind == TokenKind::StringLiteral) {
            std::string v = decode_string(cur().lexeme);
            bump();
            return v;
        }
        error_here("P001", std::string("expected ") + what + ", found " + describe(cur()));
        return "";
    }

    static std::string decode_string(const std::string& lexeme) {
        std::string out;
        // strip quotes if present (unterminated literals may lack the closer)
        std::size_t begin = lexeme.size() > 0 && lexeme.front() == '"' ? 1 : 0;
        std::size_t end = lexeme.size();
        if (end > begin && lexeme.back() == '"') --end;
        for (std::size_t i = begin; i < end; ++i) {
            char c = lexeme[i];
            if (c == '\\' && i + 1 < end) {
                char e = lexeme[++i];
                switch (e) {
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                case 'r': out += '\r'; break;
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                default: out += e; break;
                }
            } else {
                out += c;
            }
        }
        return out;
    }

    // Skip to the next top-level declaration so several errors can be reported
    // in one pass.
    void recover_top_level() {
        int depth = 0;
        while (!at_end()) {
            if (at_punct("{")) ++depth;
            if (at_punct("}")) {
                if (depth > 0) --depth;
                bump();
                if (depth == 0 && (at_kw("thing") || at_kw("configuration") || at_end()))
                    return;
                continue;
            }
            if (depth == 0 && (at_kw("thing") || at_kw("configuration"))) return;
            bump();
        }
    }

    // ---- shared pieces -----------------------------------------------------

    Annotation parse_annotation() {
        Annotation a;
        a.span = cur().span;
        a.key = cur().lexeme.substr(1); // drop '@'
        bump();
        a.value = expect_string("annotation value string");
        return a;
    }

    std::string expect_type_name() {
        if (cur().kind == TokenKind::Keyword) {
            const std::string& w = cur().lexeme;
            if (w == "Int32" || w == "Long" || w == "Float" || w == "Double" ||
                w == "Boolean" || w == "String") {
                std::string t = w;
                bump();
                return t;
            }
        }
        error_here("P001", "expected a type name, found " + describe(cur()));
        bump();
        return "Int32";
    }

    // ---- thing -------------------------------------------------------------

    Thing parse_thing() {
        Thing t;
        t.span = cur().span;
        expect_kw("thing");
        if (eat_kw("fragment")) t.is_fragment = true;
        t.name = expect_identifier("thing name");
        if (eat_kw("includes")) {
            t.includes.push_back(expect_identifier("fragment name"));
            while (eat_punct(",")) t.includes.push_back(expect_identifier("fragment name"));
        }
        while (at_annotation()) t.annotations.push_back(parse_annotation());
        expect_punct("{");
        bool saw_statechart = false;
        while (!at_end() && !at_punct("}")) {
            if (at_kw("provided") || at_kw("required")) {
                t.ports.push_back(parse_port());
            } else if (at_kw("message")) {
                t.messages.push_back(parse_message());
            } else if (at_kw("property")) {
                t.properties.push_back(parse_property());
            } else if (at_kw("data_analytics")) {
                Span sp = cur().span;
                t.analytics.push_back(parse_data_analytics());
                if (saw_statechart) {
                    diags_.push_back({"P002", Severity::Error, sp,
                                      "data_analytics section must come before the statechart",
                                      path_});
                }
            } else if (at_kw("statechart")) {
                saw_statechart = true;
                t.statecharts.push_back(parse_statechart());
            } else {
                error_here("P001", "expected a thing member, found " + describe(cur()));
                bump();
            }
        }
        expect_punct("}");
        return t;
    }

    Port parse_port() {
        Port p;
        p.span = cur().span;
        p.provided = at_kw("provided");
        bump(); // provided | required
        expect_kw("port");
        p.name = expect_identifier("port name");
        expect_punct("{");
        while (!at_end() && !at_punct("}")) {
            if (eat_kw("receives")) {
                p.receives.push_back(expect_identifier("message name"));
                while (eat_punct(",")) p.receives.push_back(expect_identifier("message name"));
            } else if (eat_kw("sends")) {
                p.sends.push_back(expect_identifier("message name"));
                while (eat_punct(",")) p.sends.push_back(expect_identifier("message name"));
            } else {
                error_here("P001", "expected 'receives' or 'sends', found " + describe(cur()));
                bump();
            }
        }
        expect_punct("}");
        return p;
    }

    Message parse_message() {
        Message m;
        m.span = cur().span;
        expect_kw("message");
        m.name = expect_identifier("message name");
        expect_punct("(");
        if (!at_punct(")")) {
            m.params.push_back(parse_param());
            while (eat_punct(",")) m.params.push_back(parse_param());
        }
        expect_punct(")");
        return m;
    }

    Param parse_param() {
        Param p;
        p.span = cur().span;
        p.name = expect_identifier("parameter name");
        expect_punct(":");
        p.type = expect_type_name();
        return p;
    }

    Property parse_property() {
        Property p;
        p.span = cur().span;
        expect_kw("property");
        p.name = expect_identifier("property name");
        expect_punct(":");
        p.type = expect_type_name();
        if (eat_punct("=")) p.init = parse_expr();
        return p;
    }

    // ---- data analytics ----------------------------------------------------

    bool parse_on_off(const char* what) {
        if (eat_kw("ON")) return true;
        if (eat_kw("OFF")) return false;
        error_here("P001", std::string("expected ON or OFF after '") + what + "'");
        bump();
        return false;
    }

    bool parse_true_false(const char* what) {
        if (eat_kw("TRUE") || eat_kw("true")) return true;
        if (eat_kw("FALSE") || eat_kw("false")) return false;
        error_here("P001", std::string("expected TRUE or FALSE after '") + what + "'");
        bump();
        return false;
    }

    DataAnalytics parse_data_analytics() {
        DataAnalytics da;
        da.span = cur().span;
        expect_kw("data_analytics");
        da.name = expect_identifier("data analytics name");
        while (at_annotation()) da.annotations.push_back(parse_annotation());
        expect_punct("{");
        while (!at_end() && !at_punct("}")) {
            if (eat_kw("labels")) {
                da.labels = parse_on_off("labels");
            } else if (eat_kw("features")) {
                da.features.push_back(expect_identifier("feature property name"));
                while (eat_punct(",")) da.features.push_back(expect_identifier("feature property name"));
            } else if (eat_kw("prediction_results")) {
                da.prediction_results = expect_identifier("property name");
            } else if (eat_kw("dataset")) {
                da.dataset = expect_string("dataset path string");
            } else if (eat_kw("automl")) {
                da.automl = parse_on_off("automl");
            } else if (eat_kw("sequential")) {
                da.sequential = parse_true_false("sequential");
            } else if (eat_kw("timestamps")) {
                da.timestamps = parse_on_off("timestamps");
            } else if (eat_kw("preprocess_feature_scaler")) {
                if (cur().kind == TokenKind::Identifier ||
                    (cur().kind == TokenKind::Keyword && cur().lexeme == "not")) {
                    da.scaler = cur().lexeme;
                    bump();
                } else {
                    error_here("P001", "expected a scaler name, found " + describe(cur()));
                    bump();
                }
            } else if (eat_kw("model_algorithm")) {
                da.algorithm = parse_model_algorithm();
            } else if (eat_kw("training_results")) {
                da.training_results = expect_string("training results path string");
            } else if (eat_kw("blackbox_ml")) {
                da.blackbox_ml = parse_true_false("blackbox_ml");
            } else if (eat_kw("blackbox_ml_model")) {
                da.blackbox_ml_model = expect_string("model path string");
            } else if (eat_kw("blackbox_import_algorithm")) {
                da.blackbox_import_algorithm = expect_string("algorithm name string");
            } else {
                error_here("P001",
                           "expected a data analytics parameter, found " + describe(cur()));
                bump();
            }
        }
        expect_punct("}");
        return da;
    }

    ModelAlgorithm parse_model_algorithm() {
        ModelAlgorithm alg;
        alg.span = cur().span;
        alg.family = expect_identifier("algorithm family name");
        alg.instance = expect_identifier("model instance name");
        if (eat_punct("(")) {
            if (!at_punct(")")) {
                alg.params.push_back(parse_hyper_param());
                while (eat_punct(",")) alg.params.push_back(parse_hyper_param());
            }
            expect_punct(")");
        }
        return alg;
    }

    HyperParam parse_hyper_param() {
        HyperParam hp;
        hp.span = cur().span;
        hp.key = expect_identifier("hyperparameter name");
        switch (cur().kind) {
        case TokenKind::Identifier:
        case TokenKind::IntLiteral:
        case TokenKind::FloatLiteral:
            hp.value = cur().lexeme;
            bump();
            break;
        case TokenKind::StringLiteral:
            hp.value = decode_string(cur().lexeme);
            hp.is_string = true;
            bump();
            break;
        case TokenKind::Keyword:
            if (cur().lexeme == "true" || cur().lexeme == "false" || cur().lexeme == "TRUE" ||
                cur().lexeme == "FALSE") {
                hp.value = cur().lexeme;
                bump();
                break;
            }
            [[fallthrough]];
        default:
            error_here("P001", "expected a hyperparameter value, found " + describe(cur()));
            bump();
            break;
        }
        return hp;
    }

    // ---- statechart --------------------------------------------------------

    StateChart parse_statechart() {
        StateChart sc;
        sc.span = cur().span;
        expect_kw("statechart");
        if (cur().kind == TokenKind::Identifier) {
            sc.name = cur().lexeme;
            bump();
        }
        expect_kw("init");
        sc.initial = expect_identifier("initial state name");
        expect_punct("{");
        while (!at_end() && !at_punct("}")) {
            if (at_kw("on")) {
                parse_on_clause(sc.on_entry, sc.on_exit);
            } else if (at_kw("state") || at_kw("final")) {
                sc.states.push_back(parse_state());
            } else {
                error_here("P001", "expected 'state' or 'on', found " + describe(cur()));
                bump();
            }
        }
        expect_punct("}");
        return sc;
    }

    State parse_state() {
        State st;
        st.span = cur().span;
        if (eat_kw("final")) st.is_final = true;
        expect_kw("state");
        st.name = expect_identifier("state name");
        expect_punct("{");
        while (!at_end() && !at_punct("}")) {
            if (at_kw("on")) {
                parse_on_clause(st.on_entry, st.on_exit);
            } else if (at_kw("transition")) {
                st.transitions.push_back(parse_transition());
            } else {
                error_here("P001",
                           "expected 'on entry', 'on exit' or 'transition', found " +
                               describe(cur()));
                bump();
            }
        }
        expect_punct("}");
        return st;
    }

    void parse_on_clause(std::vector<Action>& entry, std::vector<Action>& exit) {
        expect_kw("on");
        bool is_entry = true;
        if (eat_kw("entry")) {
            is_entry = true;
        } else if (eat_kw("exit")) {
            is_entry = false;
        } else {
            error_here("P001", "expected 'entry' or 'exit' after 'on'");
        }
        std::vector<Action>& into = is_entry ? entry : exit;
        parse_action_or_block(into);
    }

    Transition parse_transition() {
        Transition tr;
        tr.span = cur().span;
        expect_kw("transition");
        expect_punct("->");
        tr.target = expect_identifier("target state name");
        if (eat_kw("event")) {
            EventClause ev;
            ev.span = cur().span;
            ev.var = expect_identifier("event variable name");
            expect_punct(":");
            ev.port = expect_identifier("port name");
            expect_punct("?");
            ev.message = expect_identifier("message name");
            tr.event = std::move(ev);
        }
        if (eat_kw("action")) parse_action_or_block(tr.actions);
        return tr;
    }

    // A single action, or `do ... end`.
    void parse_action_or_block(std::vector<Action>& into) {
        if (eat_kw("do")) {
            while (!at_end() && !at_kw("end")) {
                if (!at_action_start()) {
                    error_here("P001", "expected an action, found " + describe(cur()));
                    bump();
                    continue;
                }
                into.push_back(parse_action());
            }
            expect_kw("end");
        } else {
            if (!at_action_start()) {
                error_here("P001", "expected an action, found " + describe(cur()));
                bump();
                return;
            }
            into.push_back(parse_action());
        }
    }

    bool at_action_start() const {
        return at_kw("print") || at_kw("if") || at_kw("da_preprocess") || at_kw("da_train") ||
               at_kw("da_predict") || at_kw("da_save") || cur().kind == TokenKind::Identifier;
    }

    Action parse_action() {
        Action a;
        a.span = cur().span;
        if (eat_kw("print")) {
            PrintAction pa;
            pa.value = std::make_unique<Expr>(parse_expr());
            a.node = std::move(pa);
            return a;
        }
        if (at_kw("if")) {
            a.node = parse_if();
            return a;
        }
        if (at_kw("da_preprocess") || at_kw("da_train") || at_kw("da_predict") ||
            at_kw("da_save")) {
            DaAction daa;
            daa.kind = at_kw("da_preprocess") ? DaActionKind::Preprocess
                       : at_kw("da_train")    ? DaActionKind::Train
                       : at_kw("da_predict")  ? DaActionKind::Predict
                                              : DaActionKind::Save;
            bump();
            daa.da = expect_identifier("data analytics name");
            if (daa.kind == DaActionKind::Predict) {
                expect_punct("(");
                if (!at_punct(")")) {
                    daa.args.push_back(std::make_unique<Expr>(parse_expr()));
                    while (eat_punct(","))
                        daa.args.push_back(std::make_unique<Expr>(parse_expr()));
                }
                expect_punct(")");
            }
            a.node = std::move(daa);
            return a;
        }
        // identifier: either `port!message(args)` or `property = expr`
        std::string first = expect_identifier("action");
        if (eat_punct("!")) {
            SendAction sa;
            sa.port = std::move(first);
            sa.message = expect_identifier("message name");
            expect_punct("(");
            if (!at_punct(")")) {
                sa.args.push_back(std::make_unique<Expr>(parse_expr()));
                while (eat_punct(",")) sa.args.push_back(std::make_unique<Expr>(parse_expr()));
            }
            expect_punct(")");
            a.node = std::move(sa);
            return a;
        }
        if (eat_punct("=")) {
            AssignAction as;
            as.property = std::move(first);
            as.value = std::make_unique<Expr>(parse_expr());
            a.node = std::move(as);
            return a;
        }
        error_here("P001", "expected '=' or '!' after '" + first + "', found " + describe(cur()));
        // degrade to a no-op-ish assignment so the AST stays well-formed
        AssignAction as;
        as.property = std::move(first);
        Expr zero;
        zero.span = a.span;
        zero.node = IntLit{0};
        as.value = std::make_unique<Expr>(std::move(zero));
        a.node = std::move(as);
        return a;
    }

    IfAction parse_if() {
        expect_kw("if");
        IfAction ifa;
        expect_punct("(");
        ifa.condition = std::make_unique<Expr>(parse_expr());
        expect_punct(")");
        parse_action_or_block(ifa.then_actions);
        if (eat_kw("else")) {
            ifa.has_else = true;
            parse_action_or_block(ifa.else_actions);
        }
        return ifa;
    }

    // ---- expressions -------------------------------------------------------
    // precedence: or < and < not < comparison < additive < multiplicative < unary

    Expr parse_expr() { return parse_or(); }

    Expr make_binary(BinaryOp op, Expr lhs, Expr rhs) {
        Expr e;
        e.span = lhs.span;
        Binary b;
        b.op = op;
        b.lhs = std::make_unique<Expr>(std::move(lhs));
        b.rhs = std::make_unique<Expr>(std::move(rhs));
        e.node = std::move(b);
        return e;
    }

    Expr parse_or() {
        Expr lhs = parse_and();
        while (at_kw("or")) {
            bump();
            lhs = make_binary(BinaryOp::Or, std::move(lhs), parse_and());
        }
        return lhs;
    }

    Expr parse_and() {
        Expr lhs = parse_not();
        while (at_kw("and")) {
            bump();
            lhs = make_binary(BinaryOp::And, std::move(lhs), parse_not());
        }
        return lhs;
    }

    Expr parse_not() {
        if (at_kw("not")) {
            Span sp = cur().span;
            bump();
            Expr e;
            e.span = sp;
            Unary u;
            u.op = UnaryOp::Not;
            u.operand = std::make_unique<Expr>(parse_not());
            e.node = std::move(u);
            return e;
        }
        return parse_comparison();
    }

    Expr parse_comparison() {
        Expr lhs = parse_additive();
        static const std::pair<const char*, BinaryOp> ops[] = {
            {"==", BinaryOp::Eq}, {"!=", BinaryOp::Ne}, {"<=", BinaryOp::Le},
            {">=", BinaryOp::Ge}, {"<", BinaryOp::Lt},  {">", BinaryOp::Gt},
        };
        for (auto [text, op] : ops) {
            if (at_punct(text)) {
                bump();
                return make_binary(op, std::move(lhs), parse_additive());
            }
        }
        return lhs;
    }

    Expr parse_additive() {
        Expr lhs = parse_multiplicative();
        for (;;) {
            if (at_punct("+")) {
                bump();
                lhs = make_binary(BinaryOp::Add, std::move(lhs), parse_multiplicative());
            } else if (at_punct("-")) {
                bump();
                lhs = make_binary(BinaryOp::Sub, std::move(lhs), parse_multiplicative());
            } else {
                return lhs;
            }
        }
    }

    Expr parse_multiplicative() {
        Expr lhs = parse_unary();
        for (;;) {
            if (at_punct("*")) {
                bump();
                lhs = make_binary(BinaryOp::Mul, std::move(lhs), parse_unary());
            } else if (at_punct("/")) {
                bump();
                lhs = make_binary(BinaryOp::Div, std::move(lhs), parse_unary());
            } else {
                return lhs;
            }
        }
    }

    Expr parse_unary() {
        if (at_punct("-")) {
            Span sp = cur().span;
            bump();
            Expr e;
            e.span = sp;
            Unary u;
            u.op = UnaryOp::Neg;
            u.operand = std::make_unique<Expr>(parse_unary());
            e.node = std::move(u);
            return e;
        }
        return parse_primary();
    }

    Expr parse_primary() {
        Expr e;
        e.span = cur().span;
        switch (cur().kind) {
        case TokenKind::IntLiteral: {
            IntLit lit;
            lit.value = std::strtoll(cur().lexeme.c_str(), nullptr, 10);
            bump();
            e.node = lit;
            return e;
        }
        case TokenKind::FloatLiteral: {
            FloatLit lit;
            lit.value = std::strtod(cur().lexeme.c_str(), nullptr);
            bump();
            e.node = lit;
            return e;
        }
        case TokenKind::StringLiteral: {
            StringLit lit;
            lit.value = decode_string(cur().lexeme);
            bump();
            e.node = std::move(lit);
            return e;
        }
        case TokenKind::Keyword: {
            if (cur().lexeme == "true" || cur().lexeme == "TRUE") {
                bump();
                e.node = BoolLit{true};
                return e;
            }
            if (cur().lexeme == "false" || cur().lexeme == "FALSE") {
                bump();
                e.node = BoolLit{false};
                return e;
            }
            break;
        }
        case TokenKind::Identifier: {
            std::string name = cur().lexeme;
            bump();
            if (at_punct(".") && ahead(1).kind == TokenKind::Identifier) {
                bump();
                ParamRef pr;
                pr.var = std::move(name);
                pr.param = cur().lexeme;
                bump();
                e.node = std::move(pr);
                return e;
            }
            e.node = NameRef{std::move(name)};
            return e;
        }
        case TokenKind::Punctuation:
            if (cur().lexeme == "(") {
                bump();
                Expr inner = parse_expr();
                expect_punct(")");
                return inner;
            }
            break;
        default:
            break;
        }
        error_here("P001", "expected an expression, found " + describe(cur()));
        bump();
        e.node = IntLit{0};
        return e;
    }

    // ---- configuration -----------------------------------------------------

    Configuration parse_configuration() {
        Configuration c;
        c.span = cur().span;
        expect_kw("configuration");
        c.name = expect_identifier("configuration name");
        while (at_annotation()) c.annotations.push_back(parse_annotation());
        expect_punct("{");
        while (!at_end() && !at_punct("}")) {
            if (eat_kw("instance")) {
                Instance inst;
                inst.span = toks_[pos_ - 1].span;
                inst.name = expect_identifier("instance name");
                expect_punct(":");
                inst.thing = expect_identifier("thing name");
                c.instances.push_back(std::move(inst));
            } else if (eat_kw("connector")) {
                Connector con;
                con.span = toks_[pos_ - 1].span;
                con.from_instance = expect_identifier("instance name");
                expect_punct(".");
                con.from_port = expect_identifier("port name");
                expect_punct("=>");
                con.to_instance = expect_identifier("instance name");
                expect_punct(".");
                con.to_port = expect_identifier("port name");
                c.connectors.push_back(std::move(con));
            } else if (at_annotation()) {
                c.annotations.push_back(parse_annotation());
            } else {
                error_here("P001",
                           "expected 'instance', 'connector' or an annotation, found " +
                               describe(cur()));
                bump();
            }
        }
        expect_punct("}");
        return c;
    }
};

} // namespace

ParseResult parse_model(std::string_view source, const std::string& path) {
    LexResult lexed = tokenize(source, path);
    return Parser(std::move(lexed.tokens), path, std::move(lexed.diagnostics)).run();
}

} // namespace mlq
