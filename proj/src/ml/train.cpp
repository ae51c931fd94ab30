#include "mlq/ml/train.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "mlq/numfmt.hpp"
#include "mlq/rng.hpp"

namespace mlq::ml {

namespace {

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

std::vector<double> class_codes(const std::vector<double>& y) {
    std::set<double> uniq(y.begin(), y.end());
    return {uniq.begin(), uniq.end()};
}

std::size_t class_index(const std::vector<double>& classes, double code) {
    return static_cast<std::size_t>(
        std::lower_bound(classes.begin(), classes.end(), code) - classes.begin());
}

// Gaussian elimination with partial pivoting; false when a pivot vanishes.
bool solve_system(std::vector<std::vector<double>> a, std::vector<double> b,
                  std::vector<double>& out) {
    const std::size_t n = a.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
        if (std::fabs(a[pivot][col]) < 1e-12) return false;
        std::swap(a[pivot], a[col]);
        std::swap(b[pivot], b[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            double f = a[r][col] / a[col][col];
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    out.assign(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * out[c];
        out[i] = s / a[i][i];
    }
    return true;
}

// --- ordinary least squares ---------------------------------------------------

LinearModel train_linear(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                         std::vector<std::string>& notes) {
    const std::size_t d = X.empty() ? 0 : X[0].size();
    const std::size_t m = d + 1; // + intercept
    std::vector<std::vector<double>> gram(m, std::vector<double>(m, 0.0));
    std::vector<double> rhs(m, 0.0);
    std::vector<double> xt(m);
    for (std::size_t r = 0; r < X.size(); ++r) {
        for (std::size_t j = 0; j < d; ++j) xt[j] = X[r][j];
        xt[d] = 1.0;
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = i; j < m; ++j) gram[i][j] += xt[i] * xt[j];
            rhs[i] += xt[i] * y[r];
        }
    }
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < i; ++j) gram[i][j] = gram[j][i];

    std::vector<double> theta;
    if (!solve_system(gram, rhs, theta)) {
        for (std::size_t i = 0; i < m; ++i) gram[i][i] += 1e-10;
        if (!solve_system(gram, rhs, theta))
            throw MlError("linear_regression: normal equations are singular");
        notes.push_back("normal equations were singular; ridge jitter 1e-10 applied");
    }
    LinearModel lm;
    lm.w.assign(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(d));
    lm.b = theta[d];
    return lm;
}

} // namespace

// --- logistic regression (full-batch gradient descent) ---------------------------

double logistic_loss(const std::vector<std::vector<double>>& X, const std::vector<double>& y01,
                     const std::vector<double>& theta) {
    const std::size_t d = theta.size() - 1;
    double loss = 0.0;
    for (std::size_t r = 0; r < X.size(); ++r) {
        double z = theta[d];
        for (std::size_t j = 0; j < d; ++j) z += theta[j] * X[r][j];
        double p = sigmoid(z);
        p = std::min(1.0 - 1e-12, std::max(1e-12, p));
        loss -= y01[r] * std::log(p) + (1.0 - y01[r]) * std::log(1.0 - p);
    }
    return loss / static_cast<double>(X.size());
}

std::vector<double> logistic_grad(const std::vector<std::vector<double>>& X,
                                  const std::vector<double>& y01,
                                  const std::vector<double>& theta) {
    const std::size_t d = theta.size() - 1;
    std::vector<double> g(theta.size(), 0.0);
    for (std::size_t r = 0; r < X.size(); ++r) {
        double z = theta[d];
        for (std::size_t j = 0; j < d; ++j) z += theta[j] * X[r][j];
        double err = sigmoid(z) - y01[r];
        for (std::size_t j = 0; j < d; ++j) g[j] += err * X[r][j];
        g[d] += err;
    }
    for (double& v : g) v /= static_cast<double>(X.size());
    return g;
}

namespace {

LogisticModel train_logistic(const std::vector<std::vector<double>>& X,
                             const std::vector<double>& y, const std::vector<double>& classes,
                             const Hyperparams& hp, std::vector<double>& curve) {
    if (classes.size() != 2)
        throw MlError("logistic_regression requires a binary label (found " +
                      std::to_string(classes.size()) + " classes)");
    std::vector<double> y01(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) y01[i] = y[i] == classes[1] ? 1.0 : 0.0;

    const std::size_t d = X[0].size();
    std::vector<double> theta(d + 1, 0.0);
    curve.push_back(logistic_loss(X, y01, theta));
    for (int e = 0; e < hp.epochs; ++e) {
        std::vector<double> g = logistic_grad(X, y01, theta);
        for (std::size_t j = 0; j < theta.size(); ++j) theta[j] -= hp.learning_rate * g[j];
        curve.push_back(logistic_loss(X, y01, theta));
    }
    LogisticModel lm;
    lm.w.assign(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(d));
    lm.b = theta[d];
    return lm;
}

// --- Gaussian naive Bayes --------------------------------------------------------

GnbModel train_gnb(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                   const std::vector<double>& classes) {
    const std::size_t d = X[0].size();
    const std::size_t k = classes.size();
    GnbModel m;
    m.prior.assign(k, 0.0);
    m.mean.assign(k, std::vector<double>(d, 0.0));
    m.var.assign(k, std::vector<double>(d, 0.0));
    std::vector<std::size_t> count(k, 0);
    for (std::size_t r = 0; r < X.size(); ++r) {
        std::size_t c = class_index(classes, y[r]);
        ++count[c];
        for (std::size_t j = 0; j < d; ++j) m.mean[c][j] += X[r][j];
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (count[c] < 2)
            throw MlError("gaussian_naive_bayes needs at least 2 rows per class (class " +
                          render_double(classes[c]) + " has " + std::to_string(count[c]) + ")");
        for (std::size_t j = 0; j < d; ++j) m.mean[c][j] /= static_cast<double>(count[c]);
        m.prior[c] = static_cast<double>(count[c]) / static_cast<double>(X.size());
    }
    for (std::size_t r = 0; r < X.size(); ++r) {
        std::size_t c = class_index(classes, y[r]);
        for (std::size_t j = 0; j < d; ++j) {
            double dff = X[r][j] - m.mean[c][j];
            m.var[c][j] += dff * dff;
        }
    }
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t j = 0; j < d; ++j)
            m.var[c][j] = std::max(m.var[c][j] / static_cast<double>(count[c]), 1e-9);
    return m;
}

// --- decision tree (greedy Gini) ---------------------------------------------------

class TreeBuilder {
public:
    TreeBuilder(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                const std::vector<double>& classes, int max_depth)
        : X_(X), y_(y), classes_(classes), max_depth_(max_depth) {}

    TreeModel build() {
        std::vector<std::size_t> all(X_.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        TreeModel m;
        grow(m, all, 0);
        return m;
    }

private:
    std::vector<std::size_t> counts(const std::vector<std::size_t>& rows) const {
        std::vector<std::size_t> c(classes_.size(), 0);
        for (std::size_t r : rows) ++c[class_index(classes_, y_[r])];
        return c;
    }

    static double gini(const std::vector<std::size_t>& counts, std::size_t total) {
        double g = 1.0;
        for (std::size_t c : counts) {
            double p = static_cast<double>(c) / static_cast<double>(total);
            g -= p * p;
        }
        return g;
    }

    int leaf(TreeModel& m, const std::vector<std::size_t>& class_count) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < class_count.size(); ++c)
            if (class_count[c] > class_count[best]) best = c;
        TreeModel::Node n;
        n.value = classes_[best];
        m.nodes.push_back(n);
        return static_cast<int>(m.nodes.size() - 1);
    }

    int grow(TreeModel& m, const std::vector<std::size_t>& rows, int depth) {
        std::vector<std::size_t> cc = counts(rows);
        double impurity = gini(cc, rows.size());
        bool pure = std::count(cc.begin(), cc.end(), std::size_t{0}) + 1 >= cc.size();
        if (pure || depth >= max_depth_ || rows.size() < 2) return leaf(m, cc);

        const std::size_t d = X_[0].size();
        int best_feature = -1;
        double best_threshold = 0.0, best_score = impurity - 1e-12;
        for (std::size_t j = 0; j < d; ++j) {
            std::vector<std::size_t> order = rows;
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return X_[a][j] < X_[b][j];
            });
            std::vector<std::size_t> left(classes_.size(), 0);
            std::vector<std::size_t> right = cc;
            for (std::size_t i = 0; i + 1 < order.size(); ++i) {
                std::size_t ci = class_index(classes_, y_[order[i]]);
                ++left[ci];
                --right[ci];
                double xa = X_[order[i]][j], xb = X_[order[i + 1]][j];
                if (xa == xb) continue;
                std::size_t nl = i + 1, nr = order.size() - nl;
                double score = (static_cast<double>(nl) * gini(left, nl) +
                                static_cast<double>(nr) * gini(right, nr)) /
                               static_cast<double>(order.size());
                if (score < best_score) {
                    best_score = score;
                    best_feature = static_cast<int>(j);
                    best_threshold = xa + (xb - xa) / 2.0;
                }
            }
        }
        if (best_feature < 0) return leaf(m, cc);

        std::vector<std::size_t> lrows, rrows;
        for (std::size_t r : rows)
            (X_[r][static_cast<std::size_t>(best_feature)] <= best_threshold ? lrows : rrows)
                .push_back(r);

        TreeModel::Node n;
        n.feature = best_feature;
        n.threshold = best_threshold;
        m.nodes.push_back(n);
        std::size_t at = m.nodes.size() - 1;
        int l = grow(m, lrows, depth + 1);
        int r = grow(m, rrows, depth + 1);
        m.nodes[at].left = l;
        m.nodes[at].right = r;
        return static_cast<int>(at);
    }

    const std::vector<std::vector<double>>& X_;
    const std::vector<double>& y_;
    const std::vector<double>& classes_;
    int max_depth_;
};

} // namespace

// --- multilayer perceptron ----------------------------------------------------------

namespace {

struct MlpOffsets {
    std::size_t w1 = 0, b1, w2, b2;
    explicit MlpOffsets(const MlpShape& s)
        : b1(s.hidden * s.in), w2(b1 + s.hidden), b2(w2 + s.out * s.hidden) {}
};

void mlp_forward_theta(const MlpShape& s, const std::vector<double>& theta,
                       const std::vector<double>& x, std::vector<double>& z1,
                       std::vector<double>& h, std::vector<double>& z2) {
    MlpOffsets off(s);
    z1.assign(s.hidden, 0.0);
    h.assign(s.hidden, 0.0);
    for (std::size_t i = 0; i < s.hidden; ++i) {
        double z = theta[off.b1 + i];
        const double* row = theta.data() + off.w1 + i * s.in;
        for (std::size_t j = 0; j < s.in; ++j) z += row[j] * x[j];
        z1[i] = z;
        h[i] = s.activation == "relu" ? (z > 0 ? z : 0.0) : sigmoid(z);
    }
    z2.assign(s.out, 0.0);
    for (std::size_t o = 0; o < s.out; ++o) {
        double z = theta[off.b2 + o];
        const double* row = theta.data() + off.w2 + o * s.hidden;
        for (std::size_t i = 0; i < s.hidden; ++i) z += row[i] * h[i];
        z2[o] = z;
    }
}

std::vector<double> softmax(const std::vector<double>& z) {
    double mx = *std::max_element(z.begin(), z.end());
    std::vector<double> p(z.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        p[i] = std::exp(z[i] - mx);
        sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
}

} // namespace

double mlp_loss(const MlpShape& s, const std::vector<double>& theta,
                const std::vector<std::vector<double>>& X, const std::vector<double>& y) {
    std::vector<double> z1, h, z2;
    double loss = 0.0;
    for (std::size_t r = 0; r < X.size(); ++r) {
        mlp_forward_theta(s, theta, X[r], z1, h, z2);
        if (s.classification) {
            std::vector<double> p = softmax(z2);
            double py = std::max(p[static_cast<std::size_t>(y[r])], 1e-12);
            loss -= std::log(py);
        } else {
            double d = z2[0] - y[r];
            loss += 0.5 * d * d;
        }
    }
    return loss / static_cast<double>(X.size());
}

std::vector<double> mlp_grad(const MlpShape& s, const std::vector<double>& theta,
                             const std::vector<std::vector<double>>& X,
                             const std::vector<double>& y) {
    MlpOffsets off(s);
    std::vector<double> g(theta.size(), 0.0);
    std::vector<double> z1, h, z2;
    std::vector<double> dz2(s.out), dz1(s.hidden);
    for (std::size_t r = 0; r < X.size(); ++r) {
        mlp_forward_theta(s, theta, X[r], z1, h, z2);
        if (s.classification) {
            std::vector<double> p = softmax(z2);
            for (std::size_t o = 0; o < s.out; ++o) dz2[o] = p[o];
            dz2[static_cast<std::size_t>(y[r])] -= 1.0;
        } else {
            dz2[0] = z2[0] - y[r];
        }
        for (std::size_t o = 0; o < s.out; ++o) {
            double* row = g.data() + off.w2 + o * s.hidden;
            for (std::size_t i = 0; i < s.hidden; ++i) row[i] += dz2[o] * h[i];
            g[off.b2 + o] += dz2[o];
        }
        for (std::size_t i = 0; i < s.hidden; ++i) {
            double dh = 0.0;
            for (std::size_t o = 0; o < s.out; ++o)
                dh += theta[off.w2 + o * s.hidden + i] * dz2[o];
            double deriv = s.activation == "relu" ? (z1[i] > 0 ? 1.0 : 0.0)
                                                  : h[i] * (1.0 - h[i]);
            dz1[i] = dh * deriv;
        }
        for (std::size_t i = 0; i < s.hidden; ++i) {
            double* row = g.data() + off.w1 + i * s.in;
            for (std::size_t j = 0; j < s.in; ++j) row[j] += dz1[i] * X[r][j];
            g[off.b1 + i] += dz1[i];
        }
    }
    for (double& v : g) v /= static_cast<double>(X.size());
    return g;
}

namespace {

MlpModel train_mlp(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                   const std::vector<double>& classes, MlTask task, const Hyperparams& hp,
                   std::vector<double>& curve) {
    MlpShape s;
    s.in = X[0].size();
    s.hidden = static_cast<std::size_t>(hp.hidden_size);
    s.classification = task == MlTask::Classification;
    s.out = s.classification ? classes.size() : 1;
    s.activation = hp.activation;

    // targets: class indices for cross-entropy, raw values for squared error
    std::vector<double> t(y.size());
    for (std::size_t i = 0; i < y.size(); ++i)
        t[i] = s.classification ? static_cast<double>(class_index(classes, y[i])) : y[i];

    // Glorot-uniform weights, zero biases, drawn in parameter order
    Rng rng(static_cast<std::uint64_t>(hp.seed));
    MlpOffsets off(s);
    std::vector<double> theta(mlp_param_count(s), 0.0);
    double lim1 = std::sqrt(6.0 / static_cast<double>(s.in + s.hidden));
    for (std::size_t i = 0; i < s.hidden * s.in; ++i) theta[off.w1 + i] = rng.range(-lim1, lim1);
    double lim2 = std::sqrt(6.0 / static_cast<double>(s.hidden + s.out));
    for (std::size_t i = 0; i < s.out * s.hidden; ++i) theta[off.w2 + i] = rng.range(-lim2, lim2);

    std::vector<std::size_t> order(X.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    const std::size_t batch = static_cast<std::size_t>(hp.batch_size);

    curve.push_back(mlp_loss(s, theta, X, t));
    for (int e = 0; e < hp.epochs; ++e) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += batch) {
            std::size_t stop = std::min(order.size(), start + batch);
            std::vector<std::vector<double>> xb;
            std::vector<double> tb;
            xb.reserve(stop - start);
            for (std::size_t i = start; i < stop; ++i) {
                xb.push_back(X[order[i]]);
                tb.push_back(t[order[i]]);
            }
            std::vector<double> g = mlp_grad(s, theta, xb, tb);
            for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= hp.learning_rate * g[i];
        }
        curve.push_back(mlp_loss(s, theta, X, t));
    }

    MlpModel m;
    m.in = s.in;
    m.hidden = s.hidden;
    m.out = s.out;
    m.activation = s.activation;
    m.w1.assign(theta.begin() + static_cast<std::ptrdiff_t>(off.w1),
                theta.begin() + static_cast<std::ptrdiff_t>(off.b1));
    m.b1.assign(theta.begin() + static_cast<std::ptrdiff_t>(off.b1),
                theta.begin() + static_cast<std::ptrdiff_t>(off.w2));
    m.w2.assign(theta.begin() + static_cast<std::ptrdiff_t>(off.w2),
                theta.begin() + static_cast<std::ptrdiff_t>(off.b2));
    m.b2.assign(theta.begin() + static_cast<std::ptrdiff_t>(off.b2), theta.end());
    return m;
}

// --- k-means (Lloyd) ------------------------------------------------------------------

KMeansModel train_kmeans(const std::vector<std::vector<double>>& X, const Hyperparams& hp,
                         std::vector<double>& curve, std::size_t& iterations) {
    const std::size_t k = static_cast<std::size_t>(hp.k);
    const std::size_t n = X.size();
    const std::size_t dim = X[0].size();
    if (n < k)
        throw MlError("k_means needs at least k rows (k=" + std::to_string(k) +
                      ", rows=" + std::to_string(n) + ")");

    // seed centroids with k distinct rows in shuffled order
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(static_cast<std::uint64_t>(hp.seed));
    rng.shuffle(order);
    std::vector<std::vector<double>> centroids;
    for (std::size_t i = 0; i < n && centroids.size() < k; ++i) {
        const auto& cand = X[order[i]];
        bool dup = false;
        for (const auto& c : centroids)
            if (c == cand) dup = true;
        if (!dup) centroids.push_back(cand);
    }
    if (centroids.size() < k)
        throw MlError("k_means needs at least k distinct rows (k=" + std::to_string(k) + ")");

    std::vector<std::size_t> assign(n, 0), prev(n, SIZE_MAX);
    iterations = 0;
    for (int iter = 0; iter < 300; ++iter) {
        ++iterations;
        double inertia = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            std::size_t best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c) {
                double d = 0.0;
                for (std::size_t j = 0; j < dim; ++j) {
                    double diff = X[r][j] - centroids[c][j];
                    d += diff * diff;
                }
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            assign[r] = best;
            inertia += best_d;
        }
        curve.push_back(inertia);
        if (assign == prev) break;
        prev = assign;

        std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
        std::vector<std::size_t> count(k, 0);
        for (std::size_t r = 0; r < n; ++r) {
            ++count[assign[r]];
            for (std::size_t j = 0; j < dim; ++j) sums[assign[r]][j] += X[r][j];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (count[c] == 0) continue; // empty cluster keeps its centroid
            for (std::size_t j = 0; j < dim; ++j)
                centroids[c][j] = sums[c][j] / static_cast<double>(count[c]);
        }
    }

    KMeansModel m;
    m.k = k;
    m.dim = dim;
    m.centroids.reserve(k * dim);
    for (const auto& c : centroids) m.centroids.insert(m.centroids.end(), c.begin(), c.end());
    return m;
}

void fill_hyper_echo(TrainedModel& m, MlFamily fam, const Hyperparams& hp) {
    auto add = [&](const char* key, std::string v) { m.hyper_echo.emplace_back(key, std::move(v)); };
    add("seed", render_int(hp.seed));
    switch (fam) {
    case MlFamily::LogisticRegression:
        add("learning_rate", render_double(hp.learning_rate));
        add("epochs", render_int(hp.epochs));
        break;
    case MlFamily::DecisionTreeClassifier:
        add("max_depth", render_int(hp.max_depth));
        break;
    case MlFamily::MultilayerPerceptron:
        add("hidden_size", render_int(hp.hidden_size));
        add("activation", hp.activation);
        add("optimizer", hp.optimizer);
        add("loss", hp.loss);
        add("learning_rate", render_double(hp.learning_rate));
        add("epochs", render_int(hp.epochs));
        add("batch_size", render_int(hp.batch_size));
        break;
    case MlFamily::KMeans: add("k", render_int(hp.k)); break;
    default: break;
    }
    if (hp.error_threshold) add("error_threshold", render_double(*hp.error_threshold));
}

} // namespace

TrainedModel train(const DataAnalyticsSpec& spec, const Hyperparams& hp, const PreparedData& pd,
                   std::uint64_t step, TrainingReport* report) {
    if (!spec.family) throw MlError("data_analytics " + spec.name + " declares no model_algorithm");
    if (pd.x_train.empty()) throw MlError("training split is empty");

    TrainedModel m;
    m.family = *spec.family;
    m.task = spec.task();
    m.seed = hp.seed;
    m.trained_at_step = step;
    m.scaler = pd.scaler;
    for (std::size_t j = 0; j < pd.input_cols.size(); ++j) {
        const DaFeature& f = spec.features[pd.input_cols[j]];
        m.inputs.push_back({f.name, type_name(f.type)});
        m.input_dictionaries.push_back(pd.data.dictionaries[pd.input_cols[j]]);
    }
    if (pd.label_col) {
        const DaFeature& f = spec.features[*pd.label_col];
        m.label_name = f.name;
        m.label_type = type_name(f.type);
        m.label_dictionary = pd.data.dictionaries[*pd.label_col];
    }

    TrainingReport local;
    TrainingReport& rep = report ? *report : local;
    rep.family = family_name(m.family);
    rep.seed = hp.seed;
    rep.train_rows = pd.x_train.size();
    rep.test_rows = pd.x_test.size();
    rep.dropped_rows = pd.data.dropped_rows;
    rep.notes = pd.notes;
    rep.notes.insert(rep.notes.end(), hp.notes.begin(), hp.notes.end());

    if (m.task != MlTask::Clustering) m.classes = class_codes(pd.y_train);

    switch (m.family) {
    case MlFamily::LinearRegression:
        m.params = train_linear(pd.x_train, pd.y_train, rep.notes);
        break;
    case MlFamily::LogisticRegression:
        m.params = train_logistic(pd.x_train, pd.y_train, m.classes, hp, rep.curve);
        break;
    case MlFamily::GaussianNaiveBayes:
        m.params = train_gnb(pd.x_train, pd.y_train, m.classes);
        break;
    case MlFamily::DecisionTreeClassifier:
        m.params = TreeBuilder(pd.x_train, pd.y_train, m.classes, hp.max_depth).build();
        break;
    case MlFamily::MultilayerPerceptron:
        m.params = train_mlp(pd.x_train, pd.y_train, m.classes, m.task, hp, rep.curve);
        break;
    case MlFamily::KMeans: {
        std::size_t iters = 0;
        m.params = train_kmeans(pd.x_train, hp, rep.curve, iters);
        rep.iterations = iters;
        rep.final_inertia = rep.curve.empty() ? 0.0 : rep.curve.back();
        break;
    }
    }
    fill_hyper_echo(m, m.family, hp);

    // held-out metrics (regression / classification have ground truth)
    if (m.task != MlTask::Clustering && !pd.x_test.empty()) {
        std::vector<double> preds;
        preds.reserve(pd.x_test.size());
        for (const auto& x : pd.x_test) preds.push_back(predict_scaled(m, x));
        rep.held_out = m.task == MlTask::Regression
                           ? evaluate_regression(pd.y_test, preds)
                           : evaluate_classification(pd.y_test, preds);
        rep.has_held_out = true;
    }

    if (hp.error_threshold) {
        rep.error_threshold = hp.error_threshold;
        if (m.task == MlTask::Clustering) {
            rep.notes.push_back("error_threshold is not checkable without labels");
        } else if (!rep.has_held_out) {
            rep.notes.push_back("error_threshold not checked: no held-out rows");
        } else {
            rep.threshold_error = m.task == MlTask::Regression ? rep.held_out.mae
                                                               : 1.0 - rep.held_out.accuracy;
            rep.threshold_passed = rep.threshold_error <= *hp.error_threshold;
        }
    }
    return m;
}

} // namespace mlq::ml
