// The .mlqplan text form. One record per line, counts before tables, every
// free-form string quoted, every number decimal: load(serialize(p)) is the
// identity and serialize(load(text)) reproduces the text byte for byte.

#include <cstdlib>
#include <string>
#include <vector>

#include "mlq/numfmt.hpp"
#include "mlq/plan.hpp"

namespace mlq::plan {

namespace {

// --- writing -------------------------------------------------------------------

std::string quoted(const std::string& s) {
    std::string q = "\"";
    for (char ch : s) {
        switch (ch) {
        case '"': q += "\\\""; break;
        case '\\': q += "\\\\"; break;
        case '\n': q += "\\n"; break;
        case '\t': q += "\\t"; break;
        case '\r': q += "\\r"; break;
        default: q += ch; break;
        }
    }
    q += '"';
    return q;
}

const char* scaler_token(ScalerKind s) {
    switch (s) {
    case ScalerKind::Unset: return "unset";
    case ScalerKind::None: return "none";
    case ScalerKind::Standard: return "standard";
    case ScalerKind::MinMax: return "minmax";
    }
    return "unset";
}

std::string tri_token(const std::optional<bool>& v) {
    if (!v) return "unset";
    return *v ? "1" : "0";
}

void write_annotations(std::string& out, const char* count_tag,
                       const std::vector<PlanAnnotation>& anns) {
    out += count_tag;
    out += ' ';
    out += std::to_string(anns.size());
    out += '\n';
    for (const auto& a : anns) out += "annotation " + a.key + " " + quoted(a.value) + "\n";
}

void write_da(std::string& out, std::size_t index, const DataAnalyticsSpec& da) {
    out += "da " + std::to_string(index) + " " + da.name + "\n";
    out += "dalib " + quoted(da.dalib) + " " + (da.dalib_defaulted ? "1" : "0") + "\n";
    out += "da_annotations " + std::to_string(da.other_annotations.size()) + "\n";
    for (const auto& a : da.other_annotations)
        out += "annotation " + a.key + " " + quoted(a.value) + "\n";
    out += std::string("labels ") + (da.labels ? "1" : "0") + "\n";
    out += "features " + std::to_string(da.features.size()) + "\n";
    for (std::size_t i = 0; i < da.features.size(); ++i)
        out += "feature " + std::to_string(i) + " " + da.features[i].name + " " +
               type_name(da.features[i].type) + "\n";
    out += "prediction_results " + quoted(da.prediction_results) + " " +
           type_name(da.prediction_type) + "\n";
    out += "dataset " + quoted(da.dataset) + "\n";
    out += std::string("automl ") + (da.automl ? "1" : "0") + "\n";
    out += "sequential " + tri_token(da.sequential) + " " +
           (da.sequential_defaulted ? "1" : "0") + "\n";
    out += std::string("timestamps ") + (da.timestamps ? "1" : "0") + "\n";
    out += std::string("scaler ") + scaler_token(da.scaler) + " " +
           (da.scaler_defaulted ? "1" : "0") + "\n";
    out += std::string("family ") + (da.family ? family_name(*da.family) : "unset") + "\n";
    out += "algorithm_name " + quoted(da.algorithm_name) + "\n";
    out += "model_instance " + quoted(da.model_instance) + "\n";
    out += "hyperparams " + std::to_string(da.hyperparams.size()) + "\n";
    for (const auto& hp : da.hyperparams)
        out += "hyperparam " + hp.key + " " + quoted(hp.value) + " " +
               (hp.is_string ? "1" : "0") + "\n";
    out += "training_results " + quoted(da.training_results) + "\n";
    out += std::string("blackbox ") + (da.blackbox ? "1" : "0") + "\n";
    out += "blackbox_model_path " + quoted(da.blackbox_model_path) + "\n";
    out += "blackbox_algorithm " + quoted(da.blackbox_algorithm) + "\n";
}

void write_instr(std::string& out, const Instr& in) {
    out += op_name(in.op);
    switch (in.op) {
    case Op::PushInt:
    case Op::PushBool:
    case Op::Load:
    case Op::Arg:
    case Op::Store:
    case Op::Jump:
    case Op::AndThen:
    case Op::OrElse:
    case Op::DaPreprocess:
    case Op::DaTrain:
    case Op::DaSave:
        out += ' ' + std::to_string(in.a);
        break;
    case Op::PushNum:
        out += ' ' + render_double(in.num);
        break;
    case Op::PushStr:
    case Op::Fail:
        out += ' ' + quoted(in.text);
        break;
    case Op::Send:
        out += ' ' + std::to_string(in.a) + ' ' + std::to_string(in.b) + ' ' +
               std::to_string(in.c);
        break;
    case Op::Branch:
        out += ' ' + std::to_string(in.a) + ' ' + std::to_string(in.b);
        break;
    case Op::DaPredict:
        out += ' ' + std::to_string(in.a) + ' ' + std::to_string(in.c);
        break;
    default:
        break; // no operands
    }
    out += '\n';
}

void write_thing(std::string& out, std::size_t index, const PlanThing& t) {
    out += "thing " + std::to_string(index) + " " + t.name + "\n";
    write_annotations(out, "annotations", t.annotations);
    out += "ports " + std::to_string(t.ports.size()) + "\n";
    for (std::size_t i = 0; i < t.ports.size(); ++i)
        out += "port " + std::to_string(i) + " " + t.ports[i] + "\n";
    out += "messages " + std::to_string(t.messages.size()) + "\n";
    for (std::size_t i = 0; i < t.messages.size(); ++i) {
        out += "message " + std::to_string(i) + " " + t.messages[i].name + " " +
               std::to_string(t.messages[i].param_types.size());
        for (ValueType vt : t.messages[i].param_types) out += std::string(" ") + type_name(vt);
        out += '\n';
    }
    out += "properties " + std::to_string(t.properties.size()) + "\n";
    for (std::size_t i = 0; i < t.properties.size(); ++i)
        out += "property " + std::to_string(i) + " " + t.properties[i].name + " " +
               type_name(t.properties[i].type) + " " + std::to_string(t.properties[i].init_ip) +
               "\n";
    out += "analytics " + std::to_string(t.analytics.size()) + "\n";
    for (std::size_t i = 0; i < t.analytics.size(); ++i) write_da(out, i, t.analytics[i]);
    out += std::string("chart ") + (t.has_chart ? "1" : "0") + "\n";
    out += "initial " + std::to_string(t.initial) + "\n";
    out += "chart_entry " + std::to_string(t.chart_entry_ip) + "\n";
    out += "states " + std::to_string(t.states.size()) + "\n";
    for (std::size_t i = 0; i < t.states.size(); ++i) {
        const PlanState& s = t.states[i];
        out += "state " + std::to_string(i) + " " + s.name + " " + (s.is_final ? "1" : "0") +
               " " + std::to_string(s.entry_ip) + " " + std::to_string(s.exit_ip) + " " +
               std::to_string(s.eventless) + "\n";
    }
    out += "transitions " + std::to_string(t.transitions.size()) + "\n";
    for (std::size_t i = 0; i < t.transitions.size(); ++i)
        out += "transition " + std::to_string(i) + " " + std::to_string(t.transitions[i].target) +
               " " + std::to_string(t.transitions[i].actions_ip) + "\n";
    out += "delta";
    for (long long cell : t.delta) out += ' ' + std::to_string(cell);
    out += '\n';
    out += "code " + std::to_string(t.code.size()) + "\n";
    for (const Instr& in : t.code) write_instr(out, in);
}

// --- reading -------------------------------------------------------------------

struct Reader {
    std::vector<std::string> lines;
    std::size_t at = 0; // next unread line (0-based); error reports are 1-based

    explicit Reader(const std::string& text) {
        std::size_t start = 0;
        while (start <= text.size()) {
            std::size_t nl = text.find('\n', start);
            if (nl == std::string::npos) {
                if (start < text.size()) lines.push_back(text.substr(start));
                break;
            }
            lines.push_back(text.substr(start, nl - start));
            start = nl + 1;
        }
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw PlanError("plan line " + std::to_string(at) + ": " + msg);
    }

    bool done() const { return at >= lines.size(); }

    const std::string& take() {
        if (done())
            throw PlanError("truncated plan document: unexpected end at line " +
                            std::to_string(at + 1));
        return lines[at++];
    }

    // Splits one line into tokens; a token starting with '"' runs to the
    // matching quote with backslash escapes and is returned decoded.
    std::vector<std::string> tokens(const std::string& line) {
        std::vector<std::string> out;
        std::size_t i = 0;
        while (i < line.size()) {
            if (line[i] == ' ') {
                ++i;
                continue;
            }
            if (line[i] == '"') {
                std::string tok;
                ++i;
                bool closed = false;
                while (i < line.size()) {
                    char ch = line[i++];
                    if (ch == '\\' && i < line.size()) {
                        char esc = line[i++];
                        switch (esc) {
                        case 'n': tok += '\n'; break;
                        case 't': tok += '\t'; break;
                        case 'r': tok += '\r'; break;
                        case '"': tok += '"'; break;
                        case '\\': tok += '\\'; break;
                        default: fail(std::string("unknown escape '\\") + esc + "'");
                        }
                    } else if (ch == '"') {
                        closed = true;
                        break;
                    } else {
                        tok += ch;
                    }
                }
                if (!closed) fail("unterminated string");
                out.push_back(std::move(tok));
            } else {
                std::size_t end = line.find(' ', i);
                if (end == std::string::npos) end = line.size();
                out.push_back(line.substr(i, end - i));
                i = end;
            }
        }
        return out;
    }

    // Takes the next line, checks its tag, and enforces an exact or minimum
    // field count (min < 0 means at least |min| fields).
    std::vector<std::string> record(const char* tag, int fields) {
        std::vector<std::string> toks = tokens(take());
        if (toks.empty() || toks[0] != tag)
            fail(std::string("expected '") + tag + "' record, got '" +
                 (toks.empty() ? "" : toks[0]) + "'");
        int n = static_cast<int>(toks.size()) - 1;
        if (fields >= 0 ? n != fields : n < -fields)
            fail(std::string("'") + tag + "' record has " + std::to_string(n) + " fields");
        return toks;
    }

    long long to_int(const std::string& tok) {
        const char* begin = tok.c_str();
        char* end = nullptr;
        long long v = std::strtoll(begin, &end, 10);
        if (end != begin + tok.size() || tok.empty())
            fail("expected an integer, got '" + tok + "'");
        return v;
    }

    double to_num(const std::string& tok) {
        const char* begin = tok.c_str();
        char* end = nullptr;
        double v = std::strtod(begin, &end);
        if (end != begin + tok.size() || tok.empty())
            fail("expected a number, got '" + tok + "'");
        return v;
    }

    bool to_bool01(const std::string& tok) {
        if (tok == "0") return false;
        if (tok == "1") return true;
        fail("expected 0 or 1, got '" + tok + "'");
    }

    ValueType to_type(const std::string& tok) {
        auto t = type_from_name(tok);
        if (!t) fail("unknown type '" + tok + "'");
        return *t;
    }

    std::size_t count(const char* tag) {
        auto toks = record(tag, 1);
        long long n = to_int(toks[1]);
        if (n < 0) fail(std::string("negative count in '") + tag + "'");
        return static_cast<std::size_t>(n);
    }

    void indexed(const std::vector<std::string>& toks, std::size_t expect) {
        if (to_int(toks[1]) != static_cast<long long>(expect))
            fail("table rows out of order: expected index " + std::to_string(expect));
    }
};

std::vector<PlanAnnotation> read_annotations(Reader& r, const char* count_tag) {
    std::size_t n = r.count(count_tag);
    std::vector<PlanAnnotation> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto toks = r.record("annotation", 2);
        out.push_back({toks[1], toks[2]});
    }
    return out;
}

DataAnalyticsSpec read_da(Reader& r, std::size_t index, const std::string& thing_name) {
    DataAnalyticsSpec da;
    auto head = r.record("da", 2);
    r.indexed(head, index);
    da.name = head[2];
    da.thing = thing_name;

    auto lib = r.record("dalib", 2);
    da.dalib = lib[1];
    da.dalib_defaulted = r.to_bool01(lib[2]);

    std::size_t anns = r.count("da_annotations");
    for (std::size_t i = 0; i < anns; ++i) {
        auto toks = r.record("annotation", 2);
        da.other_annotations.push_back({toks[1], toks[2], {}});
    }

    da.labels = r.to_bool01(r.record("labels", 1)[1]);

    std::size_t feats = r.count("features");
    for (std::size_t i = 0; i < feats; ++i) {
        auto toks = r.record("feature", 3);
        r.indexed(toks, i);
        da.features.push_back({toks[2], r.to_type(toks[3])});
    }

    auto pred = r.record("prediction_results", 2);
    da.prediction_results = pred[1];
    da.prediction_type = r.to_type(pred[2]);

    da.dataset = r.record("dataset", 1)[1];
    da.automl = r.to_bool01(r.record("automl", 1)[1]);

    auto seq = r.record("sequential", 2);
    if (seq[1] != "unset") da.sequential = r.to_bool01(seq[1]);
    da.sequential_defaulted = r.to_bool01(seq[2]);

    da.timestamps = r.to_bool01(r.record("timestamps", 1)[1]);

    auto sc = r.record("scaler", 2);
    if (sc[1] == "unset")
        da.scaler = ScalerKind::Unset;
    else if (sc[1] == "none")
        da.scaler = ScalerKind::None;
    else if (sc[1] == "standard")
        da.scaler = ScalerKind::Standard;
    else if (sc[1] == "minmax")
        da.scaler = ScalerKind::MinMax;
    else
        r.fail("unknown scaler '" + sc[1] + "'");
    da.scaler_defaulted = r.to_bool01(sc[2]);

    auto fam = r.record("family", 1);
    if (fam[1] != "unset") {
        auto f = family_from_name(fam[1]);
        if (!f) r.fail("unknown model family '" + fam[1] + "'");
        da.family = *f;
    }

    da.algorithm_name = r.record("algorithm_name", 1)[1];
    da.model_instance = r.record("model_instance", 1)[1];

    std::size_t hps = r.count("hyperparams");
    for (std::size_t i = 0; i < hps; ++i) {
        auto toks = r.record("hyperparam", 3);
        ast::HyperParam hp;
        hp.key = toks[1];
        hp.value = toks[2];
        hp.is_string = r.to_bool01(toks[3]);
        da.hyperparams.push_back(std::move(hp));
    }

    da.training_results = r.record("training_results", 1)[1];
    da.blackbox = r.to_bool01(r.record("blackbox", 1)[1]);
    da.blackbox_model_path = r.record("blackbox_model_path", 1)[1];
    da.blackbox_algorithm = r.record("blackbox_algorithm", 1)[1];
    return da;
}

Instr read_instr(Reader& r) {
    auto toks = r.tokens(r.take());
    if (toks.empty()) r.fail("expected an instruction");
    Instr in;
    static const std::pair<const char*, Op> ops[] = {
        {"push_int", Op::PushInt},   {"push_num", Op::PushNum},
        {"push_bool", Op::PushBool}, {"push_str", Op::PushStr},
        {"load", Op::Load},          {"arg", Op::Arg},
        {"fail", Op::Fail},          {"neg", Op::Neg},
        {"not", Op::Not},            {"add", Op::Add},
        {"sub", Op::Sub},            {"mul", Op::Mul},
        {"div", Op::Div},            {"eq", Op::Eq},
        {"ne", Op::Ne},              {"lt", Op::Lt},
        {"le", Op::Le},              {"gt", Op::Gt},
        {"ge", Op::Ge},              {"and_then", Op::AndThen},
        {"or_else", Op::OrElse},     {"print", Op::Print},
        {"store", Op::Store},        {"send", Op::Send},
        {"branch", Op::Branch},      {"jump", Op::Jump},
        {"da_preprocess", Op::DaPreprocess}, {"da_train", Op::DaTrain},
        {"da_save", Op::DaSave},     {"da_predict", Op::DaPredict},
        {"end", Op::End},
    };
    bool known = false;
    for (auto [text, op] : ops) {
        if (toks[0] == text) {
            in.op = op;
            known = true;
            break;
        }
    }
    if (!known) r.fail("unknown instruction '" + toks[0] + "'");

    auto need = [&](std::size_t n) {
        if (toks.size() != n + 1)
            r.fail("instruction '" + toks[0] + "' takes " + std::to_string(n) + " operands");
    };
    switch (in.op) {
    case Op::PushInt:
    case Op::PushBool:
    case Op::Load:
    case Op::Arg:
    case Op::Store:
    case Op::Jump:
    case Op::AndThen:
    case Op::OrElse:
    case Op::DaPreprocess:
    case Op::DaTrain:
    case Op::DaSave:
        need(1);
        in.a = r.to_int(toks[1]);
        break;
    case Op::PushNum:
        need(1);
        in.num = r.to_num(toks[1]);
        break;
    case Op::PushStr:
    case Op::Fail:
        need(1);
        in.text = toks[1];
        break;
    case Op::Send:
        need(3);
        in.a = r.to_int(toks[1]);
        in.b = r.to_int(toks[2]);
        in.c = r.to_int(toks[3]);
        break;
    case Op::Branch:
        need(2);
        in.a = r.to_int(toks[1]);
        in.b = r.to_int(toks[2]);
        break;
    case Op::DaPredict:
        need(2);
        in.a = r.to_int(toks[1]);
        in.c = r.to_int(toks[2]);
        break;
    default:
        need(0);
        break;
    }
    return in;
}

PlanThing read_thing(Reader& r, std::size_t index) {
    PlanThing t;
    auto head = r.record("thing", 2);
    r.indexed(head, index);
    t.name = head[2];
    t.annotations = read_annotations(r, "annotations");

    std::size_t ports = r.count("ports");
    for (std::size_t i = 0; i < ports; ++i) {
        auto toks = r.record("port", 2);
        r.indexed(toks, i);
        t.ports.push_back(toks[2]);
    }

    std::size_t messages = r.count("messages");
    for (std::size_t i = 0; i < messages; ++i) {
        auto toks = r.record("message", -3);
        r.indexed(toks, i);
        PlanMessage m;
        m.name = toks[2];
        long long argc = r.to_int(toks[3]);
        if (argc < 0 || static_cast<std::size_t>(argc) + 4 != toks.size())
            r.fail("message record argument count does not match its fields");
        for (long long k = 0; k < argc; ++k)
            m.param_types.push_back(r.to_type(toks[static_cast<std::size_t>(4 + k)]));
        t.messages.push_back(std::move(m));
    }

    std::size_t props = r.count("properties");
    for (std::size_t i = 0; i < props; ++i) {
        auto toks = r.record("property", 4);
        r.indexed(toks, i);
        PlanProperty q;
        q.name = toks[2];
        q.type = r.to_type(toks[3]);
        q.init_ip = r.to_int(toks[4]);
        t.properties.push_back(std::move(q));
    }

    std::size_t das = r.count("analytics");
    for (std::size_t i = 0; i < das; ++i) t.analytics.push_back(read_da(r, i, t.name));

    t.has_chart = r.to_bool01(r.record("chart", 1)[1]);
    t.initial = r.to_int(r.record("initial", 1)[1]);
    t.chart_entry_ip = r.to_int(r.record("chart_entry", 1)[1]);

    std::size_t states = r.count("states");
    for (std::size_t i = 0; i < states; ++i) {
        auto toks = r.record("state", 6);
        r.indexed(toks, i);
        PlanState s;
        s.name = toks[2];
        s.is_final = r.to_bool01(toks[3]);
        s.entry_ip = r.to_int(toks[4]);
        s.exit_ip = r.to_int(toks[5]);
        s.eventless = r.to_int(toks[6]);
        t.states.push_back(std::move(s));
    }

    std::size_t trans = r.count("transitions");
    for (std::size_t i = 0; i < trans; ++i) {
        auto toks = r.record("transition", 3);
        r.indexed(toks, i);
        PlanTransition pt;
        pt.target = r.to_int(toks[2]);
        pt.actions_ip = r.to_int(toks[3]);
        t.transitions.push_back(pt);
    }

    auto cells = r.tokens(r.take());
    if (cells.empty() || cells[0] != "delta") r.fail("expected 'delta' record");
    for (std::size_t i = 1; i < cells.size(); ++i) t.delta.push_back(r.to_int(cells[i]));

    std::size_t code = r.count("code");
    for (std::size_t i = 0; i < code; ++i) t.code.push_back(read_instr(r));
    return t;
}

// Structural soundness: every table index in range, every branch strictly
// forward (lowered code never jumps backwards, so linear progress is a
// termination proof), every non-empty code array closed by `end`.
void check_plan(const ExecutionPlan& plan) {
    auto bad = [](const std::string& what) {
        throw PlanError("corrupted plan: " + what + " out of range");
    };

    for (const PlanThing& t : plan.things) {
        const long long props = static_cast<long long>(t.properties.size());
        const long long ports = static_cast<long long>(t.ports.size());
        const long long messages = static_cast<long long>(t.messages.size());
        const long long states = static_cast<long long>(t.states.size());
        const long long trans = static_cast<long long>(t.transitions.size());
        const long long code = static_cast<long long>(t.code.size());

        auto check_ip = [&](long long ip, const std::string& what) {
            if (ip < -1 || ip >= code) bad(what);
        };

        for (const PlanProperty& q : t.properties)
            check_ip(q.init_ip, "initializer of property '" + q.name + "'");

        if (!t.has_chart) {
            if (t.initial != -1 || t.chart_entry_ip != -1 || !t.states.empty() ||
                !t.transitions.empty() || !t.delta.empty())
                throw PlanError("corrupted plan: chartless thing '" + t.name +
                                "' carries chart tables");
        } else {
            if (t.initial < 0 || t.initial >= states) bad("initial state of '" + t.name + "'");
            check_ip(t.chart_entry_ip, "chart entry of '" + t.name + "'");
            for (const PlanState& s : t.states) {
                check_ip(s.entry_ip, "entry of state '" + s.name + "'");
                check_ip(s.exit_ip, "exit of state '" + s.name + "'");
                if (s.eventless < -1 || s.eventless >= trans)
                    bad("eventless transition of state '" + s.name + "'");
            }
            for (const PlanTransition& pt : t.transitions) {
                if (pt.target < 0 || pt.target >= states) bad("transition target");
                check_ip(pt.actions_ip, "transition actions");
            }
            if (static_cast<long long>(t.delta.size()) != states * ports * messages)
                throw PlanError("corrupted plan: delta table of '" + t.name +
                                "' has the wrong size");
            for (long long cell : t.delta)
                if (cell < -1 || cell >= trans) bad("delta cell");
        }

        if (code > 0 && t.code.back().op != Op::End)
            throw PlanError("corrupted plan: code of '" + t.name +
                            "' does not end with 'end'");
        for (long long ip = 0; ip < code; ++ip) {
            const Instr& in = t.code[static_cast<std::size_t>(ip)];
            auto fwd = [&](long long target, const char* what) {
                if (target <= ip || target >= code)
                    throw PlanError(std::string("corrupted plan: ") + what +
                                    " target must be a forward address in range");
            };
            switch (in.op) {
            case Op::Load:
            case Op::Store:
                if (in.a < 0 || in.a >= props) bad("property slot");
                break;
            case Op::Arg:
                if (in.a < 0) bad("event argument position");
                break;
            case Op::Send:
                if (in.a < 0 || in.a >= ports) bad("send port");
                if (in.b < 0 || in.b >= messages) bad("send message");
                if (in.c < 0 ||
                    in.c != static_cast<long long>(
                                t.messages[static_cast<std::size_t>(in.b)].param_types.size()))
                    throw PlanError("corrupted plan: send argument count does not match "
                                    "the message signature");
                break;
            case Op::DaPreprocess:
            case Op::DaTrain:
            case Op::DaSave:
            case Op::DaPredict:
                if (in.a < 0 || in.a >= static_cast<long long>(t.analytics.size()))
                    bad("analytics index");
                if (in.op == Op::DaPredict && in.c < 0) bad("analytics argument count");
                break;
            case Op::Jump:
            case Op::AndThen:
            case Op::OrElse:
                fwd(in.a, op_name(in.op));
                break;
            case Op::Branch:
                fwd(in.a, "branch");
                fwd(in.b, "branch");
                break;
            default:
                break;
            }
        }
    }

    const long long things = static_cast<long long>(plan.things.size());
    for (const PlanInstance& inst : plan.instances)
        if (inst.thing < 0 || inst.thing >= things)
            throw PlanError("corrupted plan: instance '" + inst.name +
                            "' names a thing out of range");
    for (const ResolvedConnector& c : plan.connectors) {
        auto end_ok = [&](int inst, int port) {
            if (inst < 0 || inst >= static_cast<int>(plan.instances.size())) return false;
            const PlanThing& t =
                plan.things[static_cast<std::size_t>(plan.instances[inst].thing)];
            return port >= 0 && port < static_cast<int>(t.ports.size());
        };
        if (!end_ok(c.from_instance, c.from_port) || !end_ok(c.to_instance, c.to_port))
            throw PlanError("corrupted plan: connector endpoint out of range");
    }
}

} // namespace

std::string serialize_plan(const ExecutionPlan& plan) {
    std::string out = "MLQPLAN/1\n";
    out += "config " + plan.config + "\n";
    write_annotations(out, "model_annotations", plan.model_annotations);
    write_annotations(out, "annotations", plan.annotations);
    out += "things " + std::to_string(plan.things.size()) + "\n";
    for (std::size_t i = 0; i < plan.things.size(); ++i) write_thing(out, i, plan.things[i]);
    out += "instances " + std::to_string(plan.instances.size()) + "\n";
    for (std::size_t i = 0; i < plan.instances.size(); ++i)
        out += "instance " + std::to_string(i) + " " + plan.instances[i].name + " " +
               std::to_string(plan.instances[i].thing) + "\n";
    out += "connectors " + std::to_string(plan.connectors.size()) + "\n";
    for (std::size_t i = 0; i < plan.connectors.size(); ++i) {
        const ResolvedConnector& c = plan.connectors[i];
        out += "connector " + std::to_string(i) + " " + std::to_string(c.from_instance) + " " +
               std::to_string(c.from_port) + " " + std::to_string(c.to_instance) + " " +
               std::to_string(c.to_port) + "\n";
    }
    return out;
}

ExecutionPlan load_plan(const std::string& text) {
    Reader r(text);
    if (r.done()) throw PlanError("empty document: expected 'MLQPLAN/1' header");
    const std::string& head = r.take();
    if (head != "MLQPLAN/1") {
        if (head.rfind("MLQPLAN/", 0) == 0)
            throw PlanError("unsupported plan version '" + head + "'; this build reads "
                            "'MLQPLAN/1'");
        throw PlanError("not an execution plan: expected 'MLQPLAN/1' header");
    }

    ExecutionPlan plan;
    plan.config = r.record("config", 1)[1];
    plan.model_annotations = read_annotations(r, "model_annotations");
    plan.annotations = read_annotations(r, "annotations");

    std::size_t things = r.count("things");
    for (std::size_t i = 0; i < things; ++i) plan.things.push_back(read_thing(r, i));

    std::size_t instances = r.count("instances");
    for (std::size_t i = 0; i < instances; ++i) {
        auto toks = r.record("instance", 3);
        r.indexed(toks, i);
        plan.instances.push_back({toks[2], r.to_int(toks[3])});
    }

    std::size_t connectors = r.count("connectors");
    for (std::size_t i = 0; i < connectors; ++i) {
        auto toks = r.record("connector", 5);
        r.indexed(toks, i);
        ResolvedConnector c;
        c.from_instance = static_cast<int>(r.to_int(toks[2]));
        c.from_port = static_cast<int>(r.to_int(toks[3]));
        c.to_instance = static_cast<int>(r.to_int(toks[4]));
        c.to_port = static_cast<int>(r.to_int(toks[5]));
        plan.connectors.push_back(c);
    }

    if (!r.done()) r.fail("trailing content after the connector table");
    check_plan(plan);
    return plan;
}

} // namespace mlq::plan
