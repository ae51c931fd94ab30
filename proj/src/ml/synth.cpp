#include "mlq/ml/synth.hpp"

#include <cstdint>

#include "mlq/ml/data.hpp"
#include "mlq/numfmt.hpp"
#include "mlq/rng.hpp"

namespace mlq::ml {

namespace {

constexpr std::size_t kAppliances = 9;

struct Wave {
    std::size_t period = 60, phase = 0;
    bool on_at(std::size_t row) const { return (row + phase) % period < period / 2; }
};

void append_cell(std::string& out, double v) {
    out += ',';
    out += render_double(v);
}

std::string smarthome(long long seed, std::size_t rows, bool timestamps, int variant) {
    // variant: 0 = classify (Boolean label), 1 = cluster (no label),
    //          2 = regress (numeric target)
    Rng rng(static_cast<std::uint64_t>(seed));
    std::vector<Wave> waves(kAppliances);
    for (auto& w : waves) {
        w.period = 20 + rng.index(101); // 20..120 rows per cycle
        w.phase = rng.index(w.period);
    }
    std::string out;
    for (std::size_t r = 0; r < rows; ++r) {
        std::string line;
        if (timestamps) line += render_timestamp(timestamp_at_step(r));
        double loads[kAppliances];
        double sum = 0.0;
        for (std::size_t a = 0; a < kAppliances; ++a) {
            // OFF draw < 5 units, ON draw > 400: separable by construction.
            // The washer-dryer is by far the heaviest load, so its duty cycle
            // dominates the distance structure the clustering presets rely on.
            double on_lo = a == kWasherColumn ? 2200.0 : 420.0;
            double on_hi = a == kWasherColumn ? 2400.0 : 480.0;
            loads[a] = waves[a].on_at(r) ? rng.range(on_lo, on_hi) : rng.range(0.5, 4.5);
            sum += loads[a];
        }
        double aggregate = sum + rng.range(-1.0, 1.0);
        for (std::size_t a = 0; a < kAppliances; ++a) {
            if (timestamps || a > 0) line += ',';
            line += render_double(loads[a]);
        }
        append_cell(line, aggregate);
        if (variant == 0) line += waves[kWasherColumn].on_at(r) ? ",true" : ",false";
        if (variant == 2) append_cell(line, loads[kWasherColumn] + rng.range(-1.0, 1.0));
        out += line;
        out += '\n';
    }
    return out;
}

std::string line_preset(long long seed, std::size_t rows, bool timestamps) {
    Rng rng(static_cast<std::uint64_t>(seed));
    std::string out;
    for (std::size_t r = 0; r < rows; ++r) {
        double x = rng.range(-10.0, 10.0);
        std::string line;
        if (timestamps) {
            line += render_timestamp(timestamp_at_step(r));
            line += ',';
        }
        line += render_double(x);
        append_cell(line, 2.0 * x + 1.0);
        out += line;
        out += '\n';
    }
    return out;
}

std::string separable_2d(long long seed, std::size_t rows, bool timestamps) {
    Rng rng(static_cast<std::uint64_t>(seed));
    std::string out;
    for (std::size_t r = 0; r < rows; ++r) {
        std::size_t label = rng.index(2);
        double cx = label ? 2.0 : -2.0;
        double cy = label ? 2.0 : -2.0;
        std::string line;
        if (timestamps) {
            line += render_timestamp(timestamp_at_step(r));
            line += ',';
        }
        line += render_double(cx + rng.range(-1.0, 1.0));
        append_cell(line, cy + rng.range(-1.0, 1.0));
        line += label ? ",1" : ",0";
        out += line;
        out += '\n';
    }
    return out;
}

} // namespace

const std::vector<std::string>& synthetic_presets() {
    static const std::vector<std::string> kPresets = {
        "smarthome-classify", "smarthome-cluster", "smarthome-regress", "line", "separable-2d"};
    return kPresets;
}

std::string gen_synthetic(const std::string& preset, long long seed, std::size_t rows,
                          bool timestamps) {
    if (preset == "smarthome-classify") return smarthome(seed, rows, timestamps, 0);
    if (preset == "smarthome-cluster") return smarthome(seed, rows, timestamps, 1);
    if (preset == "smarthome-regress") return smarthome(seed, rows, timestamps, 2);
    if (preset == "line") return line_preset(seed, rows, timestamps);
    if (preset == "separable-2d") return separable_2d(seed, rows, timestamps);
    throw MlError("unknown dataset preset '" + preset + "'");
}

} // namespace mlq::ml
