#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "threadforge/data/types.hpp"
#include "threadforge/eval/folds.hpp"
#include "threadforge/eval/metrics.hpp"
#include "threadforge/features/features.hpp"
#include "threadforge/models/train.hpp"
#include "threadforge/mos/mos.hpp"

namespace threadforge::eval {

enum class Variant { none, random, nonrandom };

std::string to_string(Variant v);
Variant parse_variant(const std::string& text);

struct EvalConfig {
    models::TrainConfig train;
    // Augmentation settings; `kind` is overridden by the variant.
    AugmentationStrategy strategy;
    std::uint64_t seed = 0;   // per-fold training seeds derive from (seed, event)
    std::size_t workers = 1;  // folds run concurrently
};

struct FoldResult {
    std::string test_event;
    std::size_t train_size = 0;
    std::vector<std::string> thread_ids;
    std::vector<std::size_t> truth;
    std::vector<std::size_t> preds;
    Metrics metrics;
};

struct LoocvResult {
    Variant variant = Variant::none;
    models::ModelKind model = models::ModelKind::gcn;
    std::vector<FoldResult> folds;
    Metrics aggregate;  // over the pooled predictions of every fold
};

// Training pool for a variant: `dataset` itself for none, otherwise
// oversample_dataset with the variant's selection strategy.
Dataset training_pool(const Dataset& dataset, Variant variant, const AugmentationStrategy& strategy,
                      const CandidateTable& candidates, std::size_t workers = 1);

std::uint64_t fold_seed(std::uint64_t seed, const std::string& test_event);

// `pool` must be training_pool(dataset, variant, ...) or an equivalent file.
// Throws DataError if the fold audit finds leakage.
LoocvResult run_loocv(models::ModelKind kind, const Dataset& dataset, const Dataset& pool, Variant variant,
                      const EmbeddingProvider& provider, const EvalConfig& config);

struct CurvePoint {
    std::string fold;  // event name, or "aggregate"
    double delay_hours = 0.0;
    Metrics metrics;
};

struct EarlyResult {
    Variant variant = Variant::none;
    models::ModelKind model = models::ModelKind::gcn;
    std::vector<CurvePoint> points;  // fold-major in fold order, then the aggregate curve
    std::vector<FoldResult> full_thread;
};

EarlyResult run_early_eval(models::ModelKind kind, const Dataset& dataset, const Dataset& pool, Variant variant,
                           const std::vector<double>& schedule, const EmbeddingProvider& provider,
                           const EvalConfig& config);

}  // namespace threadforge::eval
