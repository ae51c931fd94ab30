#include "mlq/ml/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "mlq/numfmt.hpp"

namespace mlq::ml {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

double score_linear(const LinearModel& m, const std::vector<double>& x) {
    return dot(m.w, x) + m.b;
}

double score_logistic(const LogisticModel& m, const TrainedModel& tm,
                      const std::vector<double>& x) {
    double p = sigmoid(dot(m.w, x) + m.b);
    return p >= 0.5 ? tm.classes[1] : tm.classes[0];
}

double score_gnb(const GnbModel& m, const TrainedModel& tm, const std::vector<double>& x) {
    constexpr double kTwoPi = 6.283185307179586;
    std::size_t best = 0;
    double best_ll = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < m.prior.size(); ++c) {
        double ll = std::log(m.prior[c]);
        for (std::size_t j = 0; j < x.size(); ++j) {
            double v = m.var[c][j];
            double d = x[j] - m.mean[c][j];
            ll -= 0.5 * (std::log(kTwoPi * v) + d * d / v);
        }
        if (ll > best_ll) {
            best_ll = ll;
            best = c;
        }
    }
    return tm.classes[best];
}

double score_tree(const TreeModel& m, const std::vector<double>& x) {
    int at = 0;
    while (m.nodes[static_cast<std::size_t>(at)].feature >= 0) {
        const auto& n = m.nodes[static_cast<std::size_t>(at)];
        at = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return m.nodes[static_cast<std::size_t>(at)].value;
}

void mlp_forward(const MlpModel& m, const std::vector<double>& x, std::vector<double>& out) {
    std::vector<double> h(m.hidden);
    for (std::size_t i = 0; i < m.hidden; ++i) {
        double z = m.b1[i];
        const double* row = m.w1.data() + i * m.in;
        for (std::size_t j = 0; j < m.in; ++j) z += row[j] * x[j];
        h[i] = m.activation == "relu" ? (z > 0 ? z : 0.0) : sigmoid(z);
    }
    out.assign(m.out, 0.0);
    for (std::size_t o = 0; o < m.out; ++o) {
        double z = m.b2[o];
        const double* row = m.w2.data() + o * m.hidden;
        for (std::size_t i = 0; i < m.hidden; ++i) z += row[i] * h[i];
        out[o] = z;
    }
}

double score_mlp(const MlpModel& m, const TrainedModel& tm, const std::vector<double>& x) {
    std::vector<double> out;
    mlp_forward(m, x, out);
    if (tm.task == MlTask::Regression) return out[0];
    std::size_t best = 0;
    for (std::size_t o = 1; o < out.size(); ++o)
        if (out[o] > out[best]) best = o;
    return tm.classes[best];
}

double score_kmeans(const KMeansModel& m, const std::vector<double>& x) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < m.k; ++c) {
        const double* ctr = m.centroids.data() + c * m.dim;
        double d = 0.0;
        for (std::size_t j = 0; j < m.dim; ++j) {
            double diff = x[j] - ctr[j];
            d += diff * diff;
        }
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return static_cast<double>(best);
}

} // namespace

double predict_scaled(const TrainedModel& m, const std::vector<double>& x) {
    if (auto* lin = std::get_if<LinearModel>(&m.params)) return score_linear(*lin, x);
    if (auto* lg = std::get_if<LogisticModel>(&m.params)) return score_logistic(*lg, m, x);
    if (auto* g = std::get_if<GnbModel>(&m.params)) return score_gnb(*g, m, x);
    if (auto* t = std::get_if<TreeModel>(&m.params)) return score_tree(*t, x);
    if (auto* n = std::get_if<MlpModel>(&m.params)) return score_mlp(*n, m, x);
    return score_kmeans(std::get<KMeansModel>(m.params), x);
}

double predict_encoded(const TrainedModel& m, std::vector<double> x) {
    apply_scaler(m.scaler, x);
    return predict_scaled(m, x);
}

// --- metrics ---------------------------------------------------------------------

Metrics evaluate_classification(const std::vector<double>& truth,
                                const std::vector<double>& predicted) {
    Metrics r;
    r.task = MlTask::Classification;
    r.count = truth.size();
    if (truth.empty()) return r;

    std::set<double> values(truth.begin(), truth.end());
    values.insert(predicted.begin(), predicted.end());

    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i)
        if (truth[i] == predicted[i]) ++hits;
    r.accuracy = static_cast<double>(hits) / static_cast<double>(truth.size());

    if (values.size() > 2) return r; // multi-class: accuracy only

    r.binary = true;
    // positive = the greater of the two codes; a lone code 0 means everything
    // was negative (Boolean false / class 0)
    double positive = *values.rbegin();
    if (values.size() == 1 && positive == 0.0) positive = 1.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        bool t = truth[i] == positive, p = predicted[i] == positive;
        if (t && p) ++r.tp;
        else if (!t && !p) ++r.tn;
        else if (!t && p) ++r.fp;
        else ++r.fn;
    }
    if (r.tp + r.fp == 0) r.precision_zero_div = true;
    else r.precision = static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fp);
    if (r.tp + r.fn == 0) r.recall_zero_div = true;
    else r.recall = static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn);
    if (r.precision + r.recall == 0) r.f1_zero_div = true;
    else r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
    return r;
}

Metrics evaluate_regression(const std::vector<double>& truth,
                            const std::vector<double>& predicted) {
    Metrics r;
    r.task = MlTask::Regression;
    r.count = truth.size();
    if (truth.empty()) return r;
    double abs_sum = 0.0, sq_sum = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        double d = predicted[i] - truth[i];
        abs_sum += std::fabs(d);
        sq_sum += d * d;
    }
    r.mae = abs_sum / static_cast<double>(truth.size());
    r.mse = sq_sum / static_cast<double>(truth.size());
    return r;
}

namespace {

// best accuracy over injective cluster→label assignments (clusters ≤ 8)
double assignment_purity(const std::vector<std::vector<std::size_t>>& table, std::size_t total) {
    std::size_t clusters = table.size();
    std::size_t labels = table.empty() ? 0 : table[0].size();
    std::vector<std::size_t> pick; // label chosen per cluster so far
    std::vector<bool> used(labels, false);
    std::size_t best = 0;
    // depth-first over assignments; clusters ≤ 8 keeps this tiny
    auto rec = [&](auto&& self, std::size_t c, std::size_t hits) -> void {
        if (c == clusters) {
            best = std::max(best, hits);
            return;
        }
        for (std::size_t l = 0; l < labels; ++l) {
            if (used[l]) continue;
            used[l] = true;
            self(self, c + 1, hits + table[c][l]);
            used[l] = false;
        }
    };
    rec(rec, 0, 0);
    return static_cast<double>(best) / static_cast<double>(total);
}

} // namespace

Metrics evaluate_clustering(const std::vector<double>& truth,
                            const std::vector<double>& predicted) {
    Metrics r;
    r.task = MlTask::Clustering;
    r.count = truth.size();
    if (truth.empty()) return r;

    std::map<double, std::size_t> label_ix, cluster_ix;
    for (double t : truth) label_ix.emplace(t, label_ix.size());
    for (double c : predicted) cluster_ix.emplace(c, cluster_ix.size());

    std::vector<std::vector<std::size_t>> table(cluster_ix.size(),
                                                std::vector<std::size_t>(label_ix.size(), 0));
    for (std::size_t i = 0; i < truth.size(); ++i)
        ++table[cluster_ix[predicted[i]]][label_ix[truth[i]]];

    if (cluster_ix.size() <= 8 && label_ix.size() >= cluster_ix.size() &&
        label_ix.size() <= 8) {
        r.purity = assignment_purity(table, truth.size());
    } else {
        // each cluster independently takes its majority label
        std::size_t hits = 0;
        for (const auto& row : table) hits += *std::max_element(row.begin(), row.end());
        r.purity = static_cast<double>(hits) / static_cast<double>(truth.size());
    }
    return r;
}

std::string metrics_summary(const Metrics& m) {
    std::string s;
    auto kv = [&](const char* key, double v) {
        if (!s.empty()) s += ' ';
        s += key;
        s += '=';
        s += render_double(v);
    };
    switch (m.task) {
    case MlTask::Classification:
        kv("accuracy", m.accuracy);
        if (m.binary) {
            kv("precision", m.precision);
            kv("recall", m.recall);
            kv("f1", m.f1);
            std::string zeros;
            if (m.precision_zero_div) zeros += zeros.empty() ? "precision" : ",precision";
            if (m.recall_zero_div) zeros += zeros.empty() ? "recall" : ",recall";
            if (m.f1_zero_div) zeros += zeros.empty() ? "f1" : ",f1";
            if (!zeros.empty()) s += " zero_division=" + zeros;
        }
        break;
    case MlTask::Regression:
        kv("mae", m.mae);
        kv("mse", m.mse);
        break;
    case MlTask::Clustering:
        kv("purity", m.purity);
        break;
    }
    return s;
}

} // namespace mlq::ml
