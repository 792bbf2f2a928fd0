#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace threadforge {

// Seeded stream with platform-independent draws. The engine output is fixed
// by the standard; the distributions below are our own so results do not
// depend on the standard library implementation.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n);

    // k distinct indices from [0, n), in draw order (partial Fisher-Yates).
    std::vector<std::size_t> sample_distinct(std::size_t n, std::size_t k);

    // Index drawn proportionally to non-negative weights; total must be > 0.
    std::size_t weighted_index(std::span<const double> weights);

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[below(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace threadforge
