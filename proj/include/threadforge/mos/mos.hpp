#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "threadforge/common/random.hpp"
#include "threadforge/data/types.hpp"
#include "threadforge/mos/candidates.hpp"
#include "threadforge/preprocess/normalize.hpp"

namespace threadforge {

struct AugmentationStrategy {
    enum class Kind { random, nonrandom };

    Kind kind = Kind::nonrandom;
    double p_aug = 0.20;           // fraction of a thread's tweets rewritten per copy
    int fold_cap = 3;              // cap on whole-set augmentation rounds
    std::uint64_t seed = 0;
    double token_fraction = 0.15;  // fraction of non-keyword tokens substituted per tweet
    // Swap with other tokens of the same thread when a tweet has no candidates.
    bool vocabulary_fallback = true;

    void validate() const;
};

std::string_view to_string(AugmentationStrategy::Kind kind) noexcept;

struct InfluenceDistribution {
    std::vector<double> weights;     // tokens - keyword tokens, per tweet
    std::vector<double> normalized;  // selection probabilities
};

// Influence score per tweet; uniform over tweets with at least one token when
// every score is zero.
InfluenceDistribution influence_weights(const Thread& thread);
InfluenceDistribution influence_weights(std::span<const PreprocessedText> tweets);

struct AugmentStats {
    std::size_t threads = 0;
    std::size_t tweets_selected = 0;
    std::size_t tweets_unchanged = 0;  // selected but no substitution was possible

    AugmentStats& operator+=(const AugmentStats& o) {
        threads += o.threads;
        tweets_selected += o.tweets_selected;
        tweets_unchanged += o.tweets_unchanged;
        return *this;
    }
};

// Number of tweets rewritten in one augmented copy of an n-tweet thread.
std::size_t tweets_to_select(double p_aug, std::size_t n);

// Substitutes up to max(1, round(fraction * non-keyword tokens)) non-keyword
// positions. Uses the candidate table when it knows `key`, otherwise swaps with
// a different token drawn from `vocabulary` (sorted, distinct). Keyword tokens
// are never modified.
PreprocessedText substitute_tweet(const PreprocessedText& text, std::uint64_t key, const CandidateTable& candidates,
                                  Rng& rng, std::span<const std::string> vocabulary = {},
                                  double token_fraction = 0.15);

// Distinct non-keyword tokens of a thread, sorted.
std::vector<std::string> thread_vocabulary(std::span<const PreprocessedText> tweets);

// Tweets chosen for rewriting: uniform (random) or influence-weighted without
// replacement (nonrandom; zero-weight tweets are never chosen while any weight is positive).
std::vector<std::size_t> select_tweets(std::span<const PreprocessedText> tweets, const AugmentationStrategy& strategy,
                                       Rng& rng);

// One augmented copy of `thread`: topology, timestamps, users and label are
// kept; provenance records (thread id, fold_index).
Thread augment_thread(const Thread& thread, const AugmentationStrategy& strategy, const CandidateTable& candidates,
                      Rng& rng, int fold_index, AugmentStats* stats = nullptr);

// Seed of the stream used for one augmented copy.
std::uint64_t augmentation_stream_seed(std::uint64_t seed, const std::string& thread_id, int fold_index);
std::string augmented_thread_id(const std::string& parent_id, int fold_index);

struct OversamplePlan {
    std::size_t n_fold = 0;     // whole-set rounds actually run (after the cap)
    std::size_t n_random = 0;   // extra single augmentations
    std::size_t deficit = 0;    // filled by extra rounds when the cap bites
};

OversamplePlan plan_oversample(std::size_t n_label, std::size_t n, int fold_cap);

// Exactly n new threads derived from `threads` (all of one label).
std::vector<Thread> oversample_label(std::span<const Thread> threads, std::size_t n,
                                     const AugmentationStrategy& strategy, const CandidateTable& candidates,
                                     std::uint64_t seed, std::size_t workers = 1, AugmentStats* stats = nullptr);

struct OversampleReport {
    // event -> class-indexed number of generated threads
    std::map<std::string, std::vector<std::size_t>> added;
    AugmentStats stats;
};

// Brings every non-empty label of every event up to the event's largest label
// count. Originals are kept verbatim and come first in each event.
Dataset oversample_dataset(const Dataset& dataset, const AugmentationStrategy& strategy,
                           const CandidateTable& candidates, std::size_t workers = 1,
                           OversampleReport* report = nullptr);

}  // namespace threadforge
