#include "mlq/ml/io.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "mlq/numfmt.hpp"

namespace mlq::ml {

namespace {

const char* kMagic = "MLQM/1";

const char* family_tag(MlFamily f) {
    switch (f) {
    case MlFamily::LinearRegression: return "linear";
    case MlFamily::LogisticRegression: return "logistic";
    case MlFamily::GaussianNaiveBayes: return "gnb";
    case MlFamily::DecisionTreeClassifier: return "tree";
    case MlFamily::MultilayerPerceptron: return "mlp";
    case MlFamily::KMeans: return "kmeans";
    }
    return "";
}

void emit_row(std::string& out, const char* key, std::size_t index, const double* v,
              std::size_t n) {
    out += key;
    out += ' ';
    out += render_int(static_cast<long long>(index));
    for (std::size_t i = 0; i < n; ++i) {
        out += ' ';
        out += render_double(v[i]);
    }
    out += '\n';
}

void emit_vec(std::string& out, const char* key, const std::vector<double>& v) {
    out += key;
    for (double x : v) {
        out += ' ';
        out += render_double(x);
    }
    out += '\n';
}

} // namespace

std::string serialize_model(const TrainedModel& m) {
    std::string out;
    out += kMagic;
    out += '\n';
    auto line = [&](const std::string& s) {
        out += s;
        out += '\n';
    };
    line("family " + std::string(family_tag(m.family)));
    line("task " + std::string(task_name(m.task)));
    line("seed " + render_int(m.seed));
    line("trained_at_step " + render_int(static_cast<long long>(m.trained_at_step)));
    line("inputs " + render_int(static_cast<long long>(m.inputs.size())));
    for (std::size_t i = 0; i < m.inputs.size(); ++i)
        line("input " + render_int(static_cast<long long>(i)) + " " + m.inputs[i].name + " " +
             m.inputs[i].type);
    if (!m.label_name.empty()) line("label " + m.label_name + " " + m.label_type);
    if (!m.classes.empty()) {
        line("classes " + render_int(static_cast<long long>(m.classes.size())));
        for (std::size_t i = 0; i < m.classes.size(); ++i)
            line("class " + render_int(static_cast<long long>(i)) + " " +
                 render_double(m.classes[i]));
    }
    if (!m.label_dictionary.empty()) {
        line("label_dict " + render_int(static_cast<long long>(m.label_dictionary.size())));
        for (std::size_t i = 0; i < m.label_dictionary.size(); ++i)
            line("label_dict_entry " + render_int(static_cast<long long>(i)) + " " +
                 m.label_dictionary[i]);
    }
    for (std::size_t c = 0; c < m.input_dictionaries.size(); ++c) {
        if (m.input_dictionaries[c].empty()) continue;
        line("dict " + render_int(static_cast<long long>(c)) + " " +
             render_int(static_cast<long long>(m.input_dictionaries[c].size())));
        for (std::size_t i = 0; i < m.input_dictionaries[c].size(); ++i)
            line("dict_entry " + render_int(static_cast<long long>(c)) + " " +
                 render_int(static_cast<long long>(i)) + " " + m.input_dictionaries[c][i]);
    }
    const char* scaler_tag = m.scaler.kind == ScalerKind::Standard ? "standard"
                             : m.scaler.kind == ScalerKind::MinMax ? "minmax"
                                                                   : "none";
    line("scaler " + std::string(scaler_tag));
    if (m.scaler.kind == ScalerKind::Standard || m.scaler.kind == ScalerKind::MinMax)
        for (std::size_t j = 0; j < m.scaler.center.size(); ++j)
            line("scaler_col " + render_int(static_cast<long long>(j)) + " " +
                 render_double(m.scaler.center[j]) + " " + render_double(m.scaler.scale[j]));
    for (const auto& note : m.scaler.notes) line("scaler_note " + note);
    for (const auto& [k, v] : m.hyper_echo) line("hyper " + k + " " + v);

    if (auto* lin = std::get_if<LinearModel>(&m.params)) {
        line("params linear " + render_int(static_cast<long long>(lin->w.size())));
        emit_vec(out, "w", lin->w);
        line("b " + render_double(lin->b));
    } else if (auto* lg = std::get_if<LogisticModel>(&m.params)) {
        line("params logistic " + render_int(static_cast<long long>(lg->w.size())));
        emit_vec(out, "w", lg->w);
        line("b " + render_double(lg->b));
    } else if (auto* g = std::get_if<GnbModel>(&m.params)) {
        std::size_t d = g->mean.empty() ? 0 : g->mean[0].size();
        line("params gnb " + render_int(static_cast<long long>(g->prior.size())) + " " +
             render_int(static_cast<long long>(d)));
        for (std::size_t c = 0; c < g->prior.size(); ++c) {
            line("prior " + render_int(static_cast<long long>(c)) + " " +
                 render_double(g->prior[c]));
            emit_row(out, "mean", c, g->mean[c].data(), d);
            emit_row(out, "var", c, g->var[c].data(), d);
        }
    } else if (auto* t = std::get_if<TreeModel>(&m.params)) {
        line("params tree " + render_int(static_cast<long long>(t->nodes.size())));
        for (std::size_t i = 0; i < t->nodes.size(); ++i) {
            const auto& n = t->nodes[i];
            line("node " + render_int(static_cast<long long>(i)) + " " + render_int(n.feature) +
                 " " + render_double(n.threshold) + " " + render_int(n.left) + " " +
                 render_int(n.right) + " " + render_double(n.value));
        }
    } else if (auto* nn = std::get_if<MlpModel>(&m.params)) {
        line("params mlp " + render_int(static_cast<long long>(nn->in)) + " " +
             render_int(static_cast<long long>(nn->hidden)) + " " +
             render_int(static_cast<long long>(nn->out)) + " " + nn->activation);
        for (std::size_t i = 0; i < nn->hidden; ++i)
            emit_row(out, "w1", i, nn->w1.data() + i * nn->in, nn->in);
        emit_vec(out, "b1", nn->b1);
        for (std::size_t o = 0; o < nn->out; ++o)
            emit_row(out, "w2", o, nn->w2.data() + o * nn->hidden, nn->hidden);
        emit_vec(out, "b2", nn->b2);
    } else {
        const auto& km = std::get<KMeansModel>(m.params);
        line("params kmeans " + render_int(static_cast<long long>(km.k)) + " " +
             render_int(static_cast<long long>(km.dim)));
        for (std::size_t c = 0; c < km.k; ++c)
            emit_row(out, "centroid", c, km.centroids.data() + c * km.dim, km.dim);
    }
    line("end");
    return out;
}

namespace {

[[noreturn]] void corrupt(const std::string& why) {
    throw MlError("corrupted model document: " + why);
}

class DocReader {
public:
    explicit DocReader(const std::string& text) {
        std::size_t start = 0;
        while (start <= text.size()) {
            std::size_t nl = text.find('\n', start);
            if (nl == std::string::npos) {
                if (start < text.size()) lines_.push_back(text.substr(start));
                break;
            }
            lines_.push_back(text.substr(start, nl - start));
            start = nl + 1;
        }
    }

    // next line split into tokens; the line must start with `key`
    std::vector<std::string> expect(const std::string& key) {
        std::vector<std::string> toks = tokens(next(key));
        if (toks.empty() || toks[0] != key) corrupt("expected '" + key + "' record");
        return toks;
    }

    // like expect, but the tail after `fixed` tokens is returned verbatim
    std::pair<std::vector<std::string>, std::string> expect_tail(const std::string& key,
                                                                 std::size_t fixed) {
        std::string l = next(key);
        std::vector<std::string> toks;
        std::size_t at = 0;
        for (std::size_t i = 0; i < fixed; ++i) {
            std::size_t sp = l.find(' ', at);
            if (sp == std::string::npos) {
                if (i + 1 == fixed && at <= l.size()) {
                    toks.push_back(l.substr(at));
                    at = l.size();
                    break;
                }
                corrupt("short '" + key + "' record");
            }
            toks.push_back(l.substr(at, sp - at));
            at = sp + 1;
        }
        if (toks.empty() || toks[0] != key) corrupt("expected '" + key + "' record");
        return {toks, at >= l.size() ? std::string() : l.substr(at)};
    }

    bool peek_is(const std::string& key) const {
        if (at_ >= lines_.size()) return false;
        const std::string& l = lines_[at_];
        return l == key || l.rfind(key + " ", 0) == 0;
    }

private:
    std::string next(const std::string& key) {
        if (at_ >= lines_.size()) corrupt("unexpected end of document before '" + key + "'");
        return lines_[at_++];
    }

    static std::vector<std::string> tokens(const std::string& l) {
        std::vector<std::string> out;
        std::size_t at = 0;
        while (at <= l.size()) {
            std::size_t sp = l.find(' ', at);
            if (sp == std::string::npos) {
                out.push_back(l.substr(at));
                break;
            }
            out.push_back(l.substr(at, sp - at));
            at = sp + 1;
        }
        return out;
    }

    std::vector<std::string> lines_;
    std::size_t at_ = 0;
};

long long to_ll(const std::string& s) {
    long long v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) corrupt("bad integer '" + s + "'");
    return v;
}

double to_d(const std::string& s) {
    double v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) corrupt("bad number '" + s + "'");
    return v;
}

std::vector<double> tail_doubles(const std::vector<std::string>& toks, std::size_t from) {
    std::vector<double> v;
    for (std::size_t i = from; i < toks.size(); ++i) v.push_back(to_d(toks[i]));
    return v;
}

} // namespace

TrainedModel deserialize_model(const std::string& text) {
    DocReader r(text);
    {
        auto magic = r.expect(kMagic);
        if (magic.size() != 1) corrupt("bad magic line");
    }
    TrainedModel m;

    auto fam = r.expect("family");
    if (fam.size() != 2) corrupt("bad family record");
    if (fam[1] == "linear") m.family = MlFamily::LinearRegression;
    else if (fam[1] == "logistic") m.family = MlFamily::LogisticRegression;
    else if (fam[1] == "gnb") m.family = MlFamily::GaussianNaiveBayes;
    else if (fam[1] == "tree") m.family = MlFamily::DecisionTreeClassifier;
    else if (fam[1] == "mlp") m.family = MlFamily::MultilayerPerceptron;
    else if (fam[1] == "kmeans") m.family = MlFamily::KMeans;
    else throw MlError("unknown model family '" + fam[1] + "'");

    auto task = r.expect("task");
    if (task.size() != 2) corrupt("bad task record");
    if (task[1] == "regression") m.task = MlTask::Regression;
    else if (task[1] == "classification") m.task = MlTask::Classification;
    else if (task[1] == "clustering") m.task = MlTask::Clustering;
    else corrupt("unknown task '" + task[1] + "'");

    m.seed = to_ll(r.expect("seed").at(1));
    m.trained_at_step = static_cast<std::uint64_t>(to_ll(r.expect("trained_at_step").at(1)));

    std::size_t n_inputs = static_cast<std::size_t>(to_ll(r.expect("inputs").at(1)));
    m.input_dictionaries.assign(n_inputs, {});
    for (std::size_t i = 0; i < n_inputs; ++i) {
        auto toks = r.expect("input");
        if (toks.size() != 4 || static_cast<std::size_t>(to_ll(toks[1])) != i)
            corrupt("bad input record");
        m.inputs.push_back({toks[2], toks[3]});
    }
    if (r.peek_is("label")) {
        auto toks = r.expect("label");
        if (toks.size() != 3) corrupt("bad label record");
        m.label_name = toks[1];
        m.label_type = toks[2];
    }
    if (r.peek_is("classes")) {
        std::size_t n = static_cast<std::size_t>(to_ll(r.expect("classes").at(1)));
        for (std::size_t i = 0; i < n; ++i) m.classes.push_back(to_d(r.expect("class").at(2)));
    }
    if (r.peek_is("label_dict")) {
        std::size_t n = static_cast<std::size_t>(to_ll(r.expect("label_dict").at(1)));
        for (std::size_t i = 0; i < n; ++i)
            m.label_dictionary.push_back(r.expect_tail("label_dict_entry", 2).second);
    }
    while (r.peek_is("dict")) {
        auto toks = r.expect("dict");
        std::size_t col = static_cast<std::size_t>(to_ll(toks.at(1)));
        std::size_t n = static_cast<std::size_t>(to_ll(toks.at(2)));
        if (col >= n_inputs) corrupt("dictionary column out of range");
        for (std::size_t i = 0; i < n; ++i)
            m.input_dictionaries[col].push_back(r.expect_tail("dict_entry", 3).second);
    }

    auto sc = r.expect("scaler");
    if (sc.size() != 2) corrupt("bad scaler record");
    if (sc[1] == "none") m.scaler.kind = ScalerKind::None;
    else if (sc[1] == "standard") m.scaler.kind = ScalerKind::Standard;
    else if (sc[1] == "minmax") m.scaler.kind = ScalerKind::MinMax;
    else corrupt("unknown scaler '" + sc[1] + "'");
    if (m.scaler.kind != ScalerKind::None) {
        m.scaler.center.assign(n_inputs, 0.0);
        m.scaler.scale.assign(n_inputs, 0.0);
        for (std::size_t j = 0; j < n_inputs; ++j) {
            auto toks = r.expect("scaler_col");
            if (toks.size() != 4) corrupt("bad scaler_col record");
            m.scaler.center[j] = to_d(toks[2]);
            m.scaler.scale[j] = to_d(toks[3]);
        }
    }
    while (r.peek_is("scaler_note"))
        m.scaler.notes.push_back(r.expect_tail("scaler_note", 1).second);
    while (r.peek_is("hyper")) {
        auto toks = r.expect("hyper");
        if (toks.size() != 3) corrupt("bad hyper record");
        m.hyper_echo.emplace_back(toks[1], toks[2]);
    }

    auto params = r.expect("params");
    if (params.size() < 2) corrupt("bad params record");
    const std::string& tag = params[1];
    if (tag == "linear" || tag == "logistic") {
        std::size_t d = static_cast<std::size_t>(to_ll(params.at(2)));
        auto w = tail_doubles(r.expect("w"), 1);
        if (w.size() != d) corrupt("coefficient count mismatch");
        double b = to_d(r.expect("b").at(1));
        if (tag == "linear") m.params = LinearModel{std::move(w), b};
        else m.params = LogisticModel{std::move(w), b};
    } else if (tag == "gnb") {
        std::size_t k = static_cast<std::size_t>(to_ll(params.at(2)));
        std::size_t d = static_cast<std::size_t>(to_ll(params.at(3)));
        GnbModel g;
        for (std::size_t c = 0; c < k; ++c) {
            g.prior.push_back(to_d(r.expect("prior").at(2)));
            auto mean = tail_doubles(r.expect("mean"), 2);
            auto var = tail_doubles(r.expect("var"), 2);
            if (mean.size() != d || var.size() != d) corrupt("gnb row width mismatch");
            g.mean.push_back(std::move(mean));
            g.var.push_back(std::move(var));
        }
        m.params = std::move(g);
    } else if (tag == "tree") {
        std::size_t n = static_cast<std::size_t>(to_ll(params.at(2)));
        TreeModel t;
        for (std::size_t i = 0; i < n; ++i) {
            auto toks = r.expect("node");
            if (toks.size() != 7) corrupt("bad node record");
            TreeModel::Node node;
            node.feature = static_cast<int>(to_ll(toks[2]));
            node.threshold = to_d(toks[3]);
            node.left = static_cast<int>(to_ll(toks[4]));
            node.right = static_cast<int>(to_ll(toks[5]));
            node.value = to_d(toks[6]);
            if (node.feature >= 0 &&
                (node.left < 0 || node.right < 0 || static_cast<std::size_t>(node.left) >= n ||
                 static_cast<std::size_t>(node.right) >= n))
                corrupt("tree child index out of range");
            t.nodes.push_back(node);
        }
        if (t.nodes.empty()) corrupt("empty tree");
        m.params = std::move(t);
    } else if (tag == "mlp") {
        MlpModel nn;
        nn.in = static_cast<std::size_t>(to_ll(params.at(2)));
        nn.hidden = static_cast<std::size_t>(to_ll(params.at(3)));
        nn.out = static_cast<std::size_t>(to_ll(params.at(4)));
        nn.activation = params.at(5);
        for (std::size_t i = 0; i < nn.hidden; ++i) {
            auto row = tail_doubles(r.expect("w1"), 2);
            if (row.size() != nn.in) corrupt("w1 row width mismatch");
            nn.w1.insert(nn.w1.end(), row.begin(), row.end());
        }
        nn.b1 = tail_doubles(r.expect("b1"), 1);
        if (nn.b1.size() != nn.hidden) corrupt("b1 width mismatch");
        for (std::size_t o = 0; o < nn.out; ++o) {
            auto row = tail_doubles(r.expect("w2"), 2);
            if (row.size() != nn.hidden) corrupt("w2 row width mismatch");
            nn.w2.insert(nn.w2.end(), row.begin(), row.end());
        }
        nn.b2 = tail_doubles(r.expect("b2"), 1);
        if (nn.b2.size() != nn.out) corrupt("b2 width mismatch");
        m.params = std::move(nn);
    } else if (tag == "kmeans") {
        KMeansModel km;
        km.k = static_cast<std::size_t>(to_ll(params.at(2)));
        km.dim = static_cast<std::size_t>(to_ll(params.at(3)));
        for (std::size_t c = 0; c < km.k; ++c) {
            auto row = tail_doubles(r.expect("centroid"), 2);
            if (row.size() != km.dim) corrupt("centroid width mismatch");
            km.centroids.insert(km.centroids.end(), row.begin(), row.end());
        }
        m.params = std::move(km);
    } else {
        throw MlError("unknown model family '" + tag + "'");
    }
    r.expect("end");
    return m;
}

void write_model_file(const std::string& path, const TrainedModel& m) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw MlError("cannot write model document '" + path + "'");
    out << serialize_model(m);
}

TrainedModel read_model_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MlError("cannot read model document '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return deserialize_model(ss.str());
}

TrainedModel load_blackbox(const DataAnalyticsSpec& spec, const std::string& model_dir) {
    std::string path = model_dir;
    if (!path.empty() && path.back() != '/') path += '/';
    path += "model.mlqm";
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw MlError("black-box model document not found: '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    TrainedModel m = deserialize_model(ss.str());

    auto expected = family_from_name(spec.blackbox_algorithm);
    if (!expected || m.family != *expected)
        throw MlError("black-box model family " + std::string(family_name(m.family)) +
                      " does not match blackbox_import_algorithm " + spec.blackbox_algorithm);

    // Φ schema must match: same input names and types, same label when present
    std::vector<SchemaColumn> want;
    const bool has_label = spec.labels && !spec.features.empty();
    for (std::size_t c = 0; c + (has_label ? 1 : 0) < spec.features.size(); ++c)
        want.push_back({spec.features[c].name, type_name(spec.features[c].type)});
    bool ok = want.size() == m.inputs.size();
    for (std::size_t i = 0; ok && i < want.size(); ++i)
        ok = want[i].name == m.inputs[i].name && want[i].type == m.inputs[i].type;
    if (ok && has_label) {
        const DaFeature& lf = spec.features.back();
        ok = m.label_name == lf.name && m.label_type == type_name(lf.type);
    } else if (ok && !has_label) {
        ok = m.label_name.empty();
    }
    if (!ok)
        throw MlError("black-box model schema does not match the data_analytics features of " +
                      spec.name);
    return m;
}

std::string training_log_line(const std::string& iso_time, const TrainedModel& m,
                              const TrainingReport& rep) {
    std::string s = iso_time;
    s += " family=" + rep.family;
    s += " model=" + std::string(family_tag(m.family));
    for (const auto& [k, v] : m.hyper_echo) s += " " + k + "=" + v;
    s += " train_rows=" + std::to_string(rep.train_rows);
    s += " test_rows=" + std::to_string(rep.test_rows);
    s += " dropped_rows=" + std::to_string(rep.dropped_rows);
    if (rep.has_held_out) s += " " + metrics_summary(rep.held_out);
    if (m.family == MlFamily::KMeans) {
        s += " iterations=" + std::to_string(rep.iterations);
        s += " inertia=" + render_double(rep.final_inertia);
    }
    if (rep.error_threshold) {
        s += " error_threshold=" + render_double(*rep.error_threshold);
        s += " held_out_error=" + render_double(rep.threshold_error);
        s += rep.threshold_passed ? " threshold=pass" : " threshold=fail";
    }
    if (!rep.notes.empty()) {
        s += " notes=";
        for (std::size_t i = 0; i < rep.notes.size(); ++i) {
            if (i) s += "; ";
            s += rep.notes[i];
        }
    }
    return s;
}

void append_training_log(const std::string& path, const std::string& line) {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw MlError("cannot write training log '" + path + "'");
    out << line << '\n';
}

std::string iso_utc_now() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
    return buf;
}

} // namespace mlq::ml
