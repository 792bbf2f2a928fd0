#include "threadforge/common/random.hpp"

#include <limits>
#include <numeric>

#include "threadforge/common/error.hpp"

namespace threadforge {

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) {
        throw UsageError("Rng::below called with n = 0");
    }
    // Rejection sampling removes modulo bias.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x = engine_();
    while (x >= limit) {
        x = engine_();
    }
    return x % n;
}

std::vector<std::size_t> Rng::sample_distinct(std::size_t n, std::size_t k) {
    if (k > n) {
        throw UsageError("sample_distinct: k exceeds population size");
    }
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        std::swap(pool[i], pool[i + below(n - i)]);
    }
    pool.resize(k);
    return pool;
}

std::size_t Rng::weighted_index(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) {
        total += w;
    }
    if (!(total > 0.0)) {
        throw UsageError("weighted_index: total weight must be positive");
    }
    const double target = uniform01() * total;
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] <= 0.0) {
            continue;
        }
        acc += weights[i];
        last_positive = i;
        if (target < acc) {
            return i;
        }
    }
    // Rounding can leave target == acc at the very end.
    return last_positive;
}

}  // namespace threadforge
