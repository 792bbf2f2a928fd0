#include "threadforge/eval/experiment.hpp"

#include <unordered_map>

#include "threadforge/common/error.hpp"
#include "threadforge/common/hash.hpp"
#include "threadforge/common/parallel.hpp"

namespace threadforge::eval {

std::string to_string(Variant v) {
    switch (v) {
        case Variant::none: return "none";
        case Variant::random: return "random";
        case Variant::nonrandom: return "nonrandom";
    }
    return "none";
}

Variant parse_variant(const std::string& text) {
    if (text == "none") return Variant::none;
    if (text == "random") return Variant::random;
    if (text == "nonrandom") return Variant::nonrandom;
    throw UsageError("unknown variant '" + text + "' (expected none, random or nonrandom)");
}

Dataset training_pool(const Dataset& dataset, Variant variant, const AugmentationStrategy& strategy,
                      const CandidateTable& candidates, std::size_t workers) {
    if (variant == Variant::none) return dataset;
    AugmentationStrategy s = strategy;
    s.kind = variant == Variant::random ? AugmentationStrategy::Kind::random : AugmentationStrategy::Kind::nonrandom;
    return oversample_dataset(dataset, s, candidates, workers);
}

std::uint64_t fold_seed(std::uint64_t seed, const std::string& test_event) { return combine_seed(seed, test_event); }

namespace {

// Features of every thread reachable from the folds, computed once.
class PreparedCache {
public:
    PreparedCache(const std::vector<Fold>& folds, const EmbeddingProvider& provider, LabelScheme scheme,
                  std::size_t workers) {
        std::vector<const Thread*> all;
        for (const auto& f : folds) {
            for (const Thread* t : f.test_threads) add(t, all);
            for (const Thread* t : f.train_threads) add(t, all);
        }
        prepared_ = models::prepare_threads(all, provider, scheme, workers);
    }

    std::vector<models::PreparedThread> gather(const std::vector<const Thread*>& threads) const {
        std::vector<models::PreparedThread> out;
        out.reserve(threads.size());
        for (const Thread* t : threads) out.push_back(prepared_[index_.at(t)]);
        return out;
    }

private:
    void add(const Thread* t, std::vector<const Thread*>& all) {
        if (index_.emplace(t, all.size()).second) all.push_back(t);
    }

    std::unordered_map<const Thread*, std::size_t> index_;
    std::vector<models::PreparedThread> prepared_;
};

std::vector<Fold> checked_folds(const Dataset& dataset, const Dataset& pool) {
    if (pool.scheme != dataset.scheme) throw DataError("training pool and dataset use different label schemes");
    auto folds = loocv_folds(dataset, pool);
    const auto violations = audit_folds(folds);
    if (!violations.empty()) {
        const auto& v = violations.front();
        throw DataError("fold leakage (" + std::to_string(violations.size()) + " violations), first: fold " +
                        v.test_event + ", thread " + v.thread_id + ": " + v.reason);
    }
    return folds;
}

models::TrainConfig fold_train_config(const EvalConfig& config, const std::string& event) {
    models::TrainConfig tc = config.train;
    tc.seed = fold_seed(config.seed, event);
    return tc;
}

FoldResult score(const std::string& event, std::size_t train_size, const models::Model& model,
                 const std::vector<models::PreparedThread>& test, LabelScheme scheme) {
    FoldResult r;
    r.test_event = event;
    r.train_size = train_size;
    for (const auto& t : test) {
        r.thread_ids.push_back(t.thread_id);
        r.truth.push_back(t.label);
    }
    r.preds = models::predict(model, test);
    r.metrics = compute_metrics(r.preds, r.truth, scheme);
    return r;
}

Metrics pooled(const std::vector<FoldResult>& folds, LabelScheme scheme) {
    std::vector<std::size_t> preds, truth;
    for (const auto& f : folds) {
        preds.insert(preds.end(), f.preds.begin(), f.preds.end());
        truth.insert(truth.end(), f.truth.begin(), f.truth.end());
    }
    return compute_metrics(preds, truth, scheme);
}

}  // namespace

LoocvResult run_loocv(models::ModelKind kind, const Dataset& dataset, const Dataset& pool, Variant variant,
                      const EmbeddingProvider& provider, const EvalConfig& config) {
    const auto folds = checked_folds(dataset, pool);
    const PreparedCache cache(folds, provider, dataset.scheme, config.workers);

    LoocvResult result;
    result.variant = variant;
    result.model = kind;
    result.folds.resize(folds.size());
    parallel_for(folds.size(), config.workers, [&](std::size_t i) {
        const Fold& fold = folds[i];
        const auto train = cache.gather(fold.train_threads);
        const auto model =
            models::train_prepared(kind, train, dataset.scheme, fold_train_config(config, fold.test_event)).model;
        result.folds[i] = score(fold.test_event, train.size(), model, cache.gather(fold.test_threads), dataset.scheme);
    });
    result.aggregate = pooled(result.folds, dataset.scheme);
    return result;
}

EarlyResult run_early_eval(models::ModelKind kind, const Dataset& dataset, const Dataset& pool, Variant variant,
                           const std::vector<double>& schedule, const EmbeddingProvider& provider,
                           const EvalConfig& config) {
    validate_schedule(schedule);
    const auto folds = checked_folds(dataset, pool);
    const PreparedCache cache(folds, provider, dataset.scheme, config.workers);

    EarlyResult result;
    result.variant = variant;
    result.model = kind;
    result.full_thread.resize(folds.size());
    // [fold][delay]
    std::vector<std::vector<FoldResult>> per_delay(folds.size());
    parallel_for(folds.size(), config.workers, [&](std::size_t i) {
        const Fold& fold = folds[i];
        const auto train = cache.gather(fold.train_threads);
        const auto model =
            models::train_prepared(kind, train, dataset.scheme, fold_train_config(config, fold.test_event)).model;
        result.full_thread[i] =
            score(fold.test_event, train.size(), model, cache.gather(fold.test_threads), dataset.scheme);
        for (double delay : schedule) {
            std::vector<Thread> cohorts;
            cohorts.reserve(fold.test_threads.size());
            for (const Thread* t : fold.test_threads) cohorts.push_back(early_cohort(*t, delay));
            std::vector<const Thread*> ptrs;
            for (const auto& c : cohorts) ptrs.push_back(&c);
            const auto prepared = models::prepare_threads(ptrs, provider, dataset.scheme);
            per_delay[i].push_back(score(fold.test_event, train.size(), model, prepared, dataset.scheme));
        }
    });
    for (std::size_t i = 0; i < folds.size(); ++i)
        for (std::size_t d = 0; d < schedule.size(); ++d)
            result.points.push_back({folds[i].test_event, schedule[d], per_delay[i][d].metrics});
    for (std::size_t d = 0; d < schedule.size(); ++d) {
        std::vector<FoldResult> at_delay;
        for (std::size_t i = 0; i < folds.size(); ++i) at_delay.push_back(per_delay[i][d]);
        result.points.push_back({"aggregate", schedule[d], pooled(at_delay, dataset.scheme)});
    }
    return result;
}

}  // namespace threadforge::eval
