#include "mlq/ml/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "mlq/rng.hpp"

namespace mlq::ml {

namespace {

bool two_digits(const std::string& s, std::size_t at, int& out) {
    if (at + 2 > s.size() || !isdigit(static_cast<unsigned char>(s[at])) ||
        !isdigit(static_cast<unsigned char>(s[at + 1])))
        return false;
    out = (s[at] - '0') * 10 + (s[at + 1] - '0');
    return true;
}

bool is_leap(int year) { return year % 4 == 0 && (year % 100 != 0 || year % 400 == 0); }

int days_in_month(int year, int month) {
    static const int kDays[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2 && is_leap(year)) return 29;
    return kDays[month - 1];
}

} // namespace

bool parse_timestamp(const std::string& text, Timestamp* out) {
    // dd-mm-yyyy HH:MM:SS — 19 characters exactly
    if (text.size() != 19 || text[2] != '-' || text[5] != '-' || text[10] != ' ' ||
        text[13] != ':' || text[16] != ':')
        return false;
    Timestamp t;
    int y_hi = 0, y_lo = 0;
    if (!two_digits(text, 0, t.day) || !two_digits(text, 3, t.month) ||
        !two_digits(text, 6, y_hi) || !two_digits(text, 8, y_lo) ||
        !two_digits(text, 11, t.hour) || !two_digits(text, 14, t.minute) ||
        !two_digits(text, 17, t.second))
        return false;
    t.year = y_hi * 100 + y_lo;
    if (t.month < 1 || t.month > 12) return false;
    if (t.day < 1 || t.day > days_in_month(t.year, t.month)) return false;
    if (t.hour > 23 || t.minute > 59 || t.second > 59) return false;
    if (out) *out = t;
    return true;
}

std::string render_timestamp(const Timestamp& t) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%02d-%02d-%04d %02d:%02d:%02d", t.day, t.month, t.year,
                  t.hour, t.minute, t.second);
    return buf;
}

Timestamp timestamp_at_step(std::uint64_t step) {
    Timestamp t; // epoch: 01-01-2024 00:00:00
    std::uint64_t seconds = step * 8;
    t.second = static_cast<int>(seconds % 60);
    std::uint64_t minutes = seconds / 60;
    t.minute = static_cast<int>(minutes % 60);
    std::uint64_t hours = minutes / 60;
    t.hour = static_cast<int>(hours % 24);
    std::uint64_t days = hours / 24;
    while (days > 0) {
        int in_month = days_in_month(t.year, t.month);
        int remaining = in_month - t.day;
        if (days <= static_cast<std::uint64_t>(remaining)) {
            t.day += static_cast<int>(days);
            break;
        }
        days -= static_cast<std::uint64_t>(remaining) + 1;
        t.day = 1;
        if (++t.month > 12) {
            t.month = 1;
            ++t.year;
        }
    }
    return t;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

bool parse_numeric(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto res = std::from_chars(first, last, out);
    return res.ec == std::errc() && res.ptr == last;
}

bool parse_boolean(const std::string& s, double& out) {
    if (s == "1" || s == "true" || s == "TRUE") {
        out = 1.0;
        return true;
    }
    if (s == "0" || s == "false" || s == "FALSE") {
        out = 0.0;
        return true;
    }
    return false;
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw MlError("dataset '" + path + "': " + what);
}

} // namespace

Dataset load_dataset(const std::string& path, const std::vector<DaFeature>& features,
                     bool timestamps) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot read file");

    const std::size_t expected = features.size() + (timestamps ? 1 : 0);

    // pass 1: split lines into raw fields, checking width / timestamps / NaN
    std::vector<std::vector<std::string>> kept;
    std::vector<std::string> stamps;
    std::size_t dropped = 0;
    std::string line;
    std::size_t line_no = 0;
    bool any_data_line = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        any_data_line = true;
        std::vector<std::string> fields = split_fields(line);
        if (fields.size() != expected)
            fail(path, "row " + std::to_string(line_no) + ": expected " +
                           std::to_string(expected) + " fields, found " +
                           std::to_string(fields.size()));
        if (timestamps && !parse_timestamp(fields.front()))
            fail(path, "row " + std::to_string(line_no) + ": invalid timestamp '" +
                           fields.front() + "'");
        bool missing = false;
        for (std::size_t i = timestamps ? 1 : 0; i < fields.size(); ++i)
            if (fields[i] == "NaN") missing = true;
        if (missing) {
            ++dropped;
            continue;
        }
        if (timestamps) {
            stamps.push_back(fields.front());
            fields.erase(fields.begin());
        }
        kept.push_back(std::move(fields));
    }
    if (!any_data_line) fail(path, "empty dataset");

    // pass 2: dictionaries for String columns (sorted unique over kept rows)
    Dataset ds;
    ds.dropped_rows = dropped;
    ds.timestamps = std::move(stamps);
    ds.dictionaries.resize(features.size());
    for (std::size_t c = 0; c < features.size(); ++c) {
        if (features[c].type != ValueType::String) continue;
        std::set<std::string> uniq;
        for (const auto& row : kept) uniq.insert(row[c]);
        ds.dictionaries[c].assign(uniq.begin(), uniq.end());
    }

    // pass 3: numeric encoding
    ds.rows.reserve(kept.size());
    for (std::size_t r = 0; r < kept.size(); ++r) {
        std::vector<double> row(features.size());
        for (std::size_t c = 0; c < features.size(); ++c) {
            const std::string& cell = kept[r][c];
            switch (features[c].type) {
            case ValueType::String:
                row[c] = encode_with_dictionary(ds.dictionaries[c], cell);
                break;
            case ValueType::Boolean:
                if (!parse_boolean(cell, row[c]))
                    fail(path, "column " + std::to_string(c + 1) + ": value '" + cell +
                                   "' is not a Boolean (" + features[c].name + ")");
                break;
            default:
                if (!parse_numeric(cell, row[c]))
                    fail(path, "column " + std::to_string(c + 1) + ": non-numeric value '" +
                                   cell + "' in numeric column " + features[c].name);
            }
        }
        ds.rows.push_back(std::move(row));
    }
    return ds;
}

double encode_with_dictionary(const std::vector<std::string>& dict, const std::string& value) {
    auto it = std::lower_bound(dict.begin(), dict.end(), value);
    if (it != dict.end() && *it == value)
        return static_cast<double>(it - dict.begin());
    return static_cast<double>(dict.size()); // unseen value: fresh code
}

Split split_rows(std::size_t n, double test_share, bool sequential, long long seed) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    if (!sequential) {
        Rng rng(static_cast<std::uint64_t>(seed));
        rng.shuffle(order);
    }
    auto cut = static_cast<std::size_t>(std::floor(static_cast<double>(n) * (1.0 - test_share)));
    if (cut > n) cut = n;
    Split s;
    s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cut));
    s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(cut), order.end());
    return s;
}

ScalerParams fit_scaler(ScalerKind kind, const std::vector<std::vector<double>>& rows,
                        const std::vector<std::size_t>& fit_rows,
                        const std::vector<std::size_t>& cols,
                        const std::vector<std::string>& col_names) {
    ScalerParams p;
    p.kind = kind;
    p.center.assign(cols.size(), 0.0);
    p.scale.assign(cols.size(), 0.0);
    if (kind == ScalerKind::None || kind == ScalerKind::Unset || fit_rows.empty()) {
        p.kind = ScalerKind::None;
        return p;
    }
    const double n = static_cast<double>(fit_rows.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
        std::size_t c = cols[j];
        if (kind == ScalerKind::Standard) {
            double sum = 0.0;
            for (std::size_t r : fit_rows) sum += rows[r][c];
            double mean = sum / n;
            double sq = 0.0;
            for (std::size_t r : fit_rows) {
                double d = rows[r][c] - mean;
                sq += d * d;
            }
            double sd = std::sqrt(sq / n); // population standard deviation
            if (sd < 1e-12) {
                p.notes.push_back("column " + col_names[j] +
                                  " has zero variance; left unscaled");
            } else {
                p.center[j] = mean;
                p.scale[j] = sd;
            }
        } else { // MinMax
            double lo = rows[fit_rows.front()][c], hi = lo;
            for (std::size_t r : fit_rows) {
                lo = std::min(lo, rows[r][c]);
                hi = std::max(hi, rows[r][c]);
            }
            if (hi - lo < 1e-12) {
                p.notes.push_back("column " + col_names[j] + " has zero range; left unscaled");
            } else {
                p.center[j] = lo;
                p.scale[j] = hi - lo;
            }
        }
    }
    return p;
}

void apply_scaler(const ScalerParams& s, std::vector<double>& x) {
    for (std::size_t j = 0; j < x.size() && j < s.scale.size(); ++j)
        if (s.scale[j] != 0.0) x[j] = (x[j] - s.center[j]) / s.scale[j];
}

PreparedData preprocess(const DataAnalyticsSpec& spec, const Hyperparams& hp,
                        const std::string& dataset_path, double test_share) {
    PreparedData pd;
    pd.data = load_dataset(dataset_path, spec.features, spec.timestamps);
    if (pd.data.rows.empty())
        throw MlError("dataset '" + dataset_path + "': no usable rows after dropping " +
                      std::to_string(pd.data.dropped_rows) + " rows with missing values");

    const std::size_t width = spec.features.size();
    const bool has_label = spec.labels && width > 0;
    if (has_label) pd.label_col = width - 1;
    std::vector<std::string> input_names;
    for (std::size_t c = 0; c < width; ++c) {
        if (has_label && c == width - 1) continue;
        pd.input_cols.push_back(c);
        input_names.push_back(spec.features[c].name);
    }

    pd.split = split_rows(pd.data.rows.size(), test_share, spec.sequential.value_or(false),
                          hp.seed);
    pd.scaler = fit_scaler(spec.scaler, pd.data.rows, pd.split.train, pd.input_cols, input_names);
    pd.notes = pd.scaler.notes;
    if (pd.data.dropped_rows > 0)
        pd.notes.push_back("dropped " + std::to_string(pd.data.dropped_rows) +
                           " rows with missing values");

    auto materialize = [&](const std::vector<std::size_t>& idx,
                           std::vector<std::vector<double>>& X, std::vector<double>& y) {
        X.reserve(idx.size());
        for (std::size_t r : idx) {
            std::vector<double> x(pd.input_cols.size());
            for (std::size_t j = 0; j < pd.input_cols.size(); ++j)
                x[j] = pd.data.rows[r][pd.input_cols[j]];
            apply_scaler(pd.scaler, x);
            X.push_back(std::move(x));
            if (pd.label_col) y.push_back(pd.data.rows[r][*pd.label_col]);
        }
    };
    materialize(pd.split.train, pd.x_train, pd.y_train);
    materialize(pd.split.test, pd.x_test, pd.y_test);
    return pd;
}

} // namespace mlq::ml
