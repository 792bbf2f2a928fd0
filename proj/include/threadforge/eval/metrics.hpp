#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "threadforge/data/types.hpp"

namespace threadforge::eval {

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
};

struct Metrics {
    LabelScheme scheme = LabelScheme::binary;
    std::size_t total = 0;
    double accuracy = 0.0;
    double micro_f1 = 0.0;
    double macro_f1 = 0.0;  // unweighted mean over all classes of the scheme; absent classes count 0
    std::vector<ClassMetrics> per_class;
    std::vector<std::vector<std::size_t>> confusion;  // [truth][prediction]
};

// Predictions and truth are class indices of `scheme`. Throws UsageError on
// empty or unequal inputs, DataError on indices outside the scheme.
Metrics compute_metrics(std::span<const std::size_t> preds, std::span<const std::size_t> truth, LabelScheme scheme);

}  // namespace threadforge::eval
