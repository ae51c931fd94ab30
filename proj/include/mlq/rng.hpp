#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace mlq {

// Deterministic random source. mt19937_64's raw output stream is pinned by
// the standard, but the std:: distributions are not, so every derived draw
// (index, real, shuffle) is implemented here from raw 64-bit outputs to keep
// artifacts byte-identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next() { return gen_(); }

    // uniform integer in [0, n), n > 0, via rejection sampling (unbiased)
    std::size_t index(std::size_t n) {
        std::uint64_t bound = static_cast<std::uint64_t>(n);
        std::uint64_t limit =
            std::numeric_limits<std::uint64_t>::max() -
            std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t x = gen_();
        while (x >= limit) x = gen_();
        return static_cast<std::size_t>(x % bound);
    }

    // uniform double in [0, 1) with 53 random mantissa bits
    double real() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double range(double lo, double hi) { return lo + (hi - lo) * real(); }

    // Fisher–Yates
    template <typename T>
    void shuffle(std::vector<T>& xs) {
        for (std::size_t i = xs.size(); i > 1; --i) {
            std::size_t j = index(i);
            std::swap(xs[i - 1], xs[j]);
        }
    }

private:
    std::mt19937_64 gen_;
};

} // namespace mlq
