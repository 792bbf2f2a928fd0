#include "threadforge/mos/mos.hpp"

#include <algorithm>
#include <cmath>

#include "threadforge/common/error.hpp"
#include "threadforge/common/hash.hpp"
#include "threadforge/common/parallel.hpp"
#include "threadforge/features/features.hpp"

namespace threadforge {

namespace {

std::size_t scaled_count(double fraction, std::size_t n) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n))));
}

bool usable_substitute(const std::string& candidate, const std::string& original) {
    if (candidate == original) {
        return false;
    }
    const PreprocessedText p = normalize_tweet(candidate);
    return p.tokens.size() == 1 && p.tokens.front() == candidate && !p.keyword_mask.front();
}

std::vector<PreprocessedText> normalize_all(const Thread& thread) {
    std::vector<PreprocessedText> out;
    out.reserve(thread.tweets.size());
    for (const Tweet& t : thread.tweets) out.push_back(normalize_tweet(t.text));
    return out;
}

}  // namespace

void AugmentationStrategy::validate() const {
    if (!(p_aug > 0.0 && p_aug <= 1.0)) {
        throw UsageError("p_aug must lie in (0, 1]");
    }
    if (fold_cap < 1) {
        throw UsageError("fold_cap must be at least 1");
    }
    if (!(token_fraction > 0.0 && token_fraction <= 1.0)) {
        throw UsageError("token_fraction must lie in (0, 1]");
    }
}

std::string_view to_string(AugmentationStrategy::Kind kind) noexcept {
    return kind == AugmentationStrategy::Kind::random ? "random" : "nonrandom";
}

InfluenceDistribution influence_weights(std::span<const PreprocessedText> tweets) {
    InfluenceDistribution d;
    d.weights.reserve(tweets.size());
    double total = 0.0;
    for (const auto& p : tweets) {
        const double w = static_cast<double>(p.tokens.size() - p.keyword_count());
        d.weights.push_back(w);
        total += w;
    }
    d.normalized.assign(tweets.size(), 0.0);
    if (total > 0.0) {
        for (std::size_t i = 0; i < tweets.size(); ++i) d.normalized[i] = d.weights[i] / total;
        return d;
    }
    std::size_t with_tokens = 0;
    for (const auto& p : tweets) with_tokens += p.tokens.empty() ? 0 : 1;
    for (std::size_t i = 0; i < tweets.size(); ++i) {
        if (with_tokens == 0) {
            // No tokens anywhere: fall back to uniform over every tweet.
            d.normalized[i] = 1.0 / static_cast<double>(tweets.size());
        } else if (!tweets[i].tokens.empty()) {
            d.normalized[i] = 1.0 / static_cast<double>(with_tokens);
        }
    }
    return d;
}

InfluenceDistribution influence_weights(const Thread& thread) {
    const auto texts = normalize_all(thread);
    return influence_weights(texts);
}

std::size_t tweets_to_select(double p_aug, std::size_t n) {
    return n == 0 ? 0 : std::min(n, scaled_count(p_aug, n));
}

std::vector<std::string> thread_vocabulary(std::span<const PreprocessedText> tweets) {
    std::vector<std::string> vocab;
    for (const auto& p : tweets) {
        for (std::size_t i = 0; i < p.tokens.size(); ++i) {
            if (!p.keyword_mask[i]) vocab.push_back(p.tokens[i]);
        }
    }
    std::sort(vocab.begin(), vocab.end());
    vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());
    return vocab;
}

PreprocessedText substitute_tweet(const PreprocessedText& text, std::uint64_t key, const CandidateTable& candidates,
                                  Rng& rng, std::span<const std::string> vocabulary, double token_fraction) {
    std::size_t non_keyword = 0;
    for (bool k : text.keyword_mask) non_keyword += k ? 0 : 1;
    if (non_keyword == 0) {
        return text;
    }
    const bool use_candidates = candidates.has_text(key);

    // Eligible positions: non-keyword tokens that have at least one usable replacement.
    struct Option {
        std::size_t position;
        std::string candidate;  // empty in vocabulary mode
    };
    std::vector<Option> eligible;
    for (std::size_t i = 0; i < text.tokens.size(); ++i) {
        if (text.keyword_mask[i]) continue;
        const std::string& original = text.tokens[i];
        if (use_candidates) {
            if (const auto* list = candidates.find(key, i)) {
                auto it = std::find_if(list->begin(), list->end(),
                                       [&](const std::string& c) { return usable_substitute(c, original); });
                if (it != list->end()) eligible.push_back({i, *it});
            }
        } else {
            const bool has_alternative =
                vocabulary.size() > 1 ||
                (vocabulary.size() == 1 && vocabulary.front() != original);
            if (has_alternative) eligible.push_back({i, {}});
        }
    }
    if (eligible.empty()) {
        return text;
    }
    const std::size_t s = std::min(eligible.size(), scaled_count(token_fraction, non_keyword));
    auto picks = rng.sample_distinct(eligible.size(), s);
    std::sort(picks.begin(), picks.end());

    PreprocessedText out = text;
    for (std::size_t pick : picks) {
        const Option& opt = eligible[pick];
        if (use_candidates) {
            out.tokens[opt.position] = opt.candidate;
            continue;
        }
        const std::string& original = text.tokens[opt.position];
        // Draw from the vocabulary minus the original token.
        const auto self = std::lower_bound(vocabulary.begin(), vocabulary.end(), original);
        const bool contains_self = self != vocabulary.end() && *self == original;
        const std::size_t pool = vocabulary.size() - (contains_self ? 1 : 0);
        std::size_t j = rng.below(pool);
        if (contains_self && j >= static_cast<std::size_t>(self - vocabulary.begin())) ++j;
        out.tokens[opt.position] = vocabulary[j];
    }
    return out;
}

std::uint64_t augmentation_stream_seed(std::uint64_t seed, const std::string& thread_id, int fold_index) {
    return combine_seed(combine_seed(seed, thread_id), static_cast<std::uint64_t>(fold_index));
}

std::string augmented_thread_id(const std::string& parent_id, int fold_index) {
    return parent_id + "~" + std::to_string(fold_index);
}

std::vector<std::size_t> select_tweets(std::span<const PreprocessedText> tweets, const AugmentationStrategy& strategy,
                                       Rng& rng) {
    const std::size_t n = tweets.size();
    const std::size_t k = tweets_to_select(strategy.p_aug, n);
    std::vector<std::size_t> selected;
    if (strategy.kind == AugmentationStrategy::Kind::random) {
        selected = rng.sample_distinct(n, k);
    } else {
        // Weighted draws without replacement.
        std::vector<double> p = influence_weights(tweets).normalized;
        for (std::size_t draw = 0; draw < k; ++draw) {
            double remaining = 0.0;
            for (double v : p) remaining += v;
            if (!(remaining > 0.0)) break;
            const std::size_t i = rng.weighted_index(p);
            selected.push_back(i);
            p[i] = 0.0;
        }
    }
    std::sort(selected.begin(), selected.end());
    return selected;
}

Thread augment_thread(const Thread& thread, const AugmentationStrategy& strategy, const CandidateTable& candidates,
                      Rng& rng, int fold_index, AugmentStats* stats) {
    if (thread.tweets.empty()) {
        throw UsageError("cannot augment an empty thread");
    }
    const auto texts = normalize_all(thread);
    const auto selected = select_tweets(texts, strategy, rng);

    const auto vocab = strategy.vocabulary_fallback ? thread_vocabulary(texts) : std::vector<std::string>{};
    Thread out = thread;
    out.thread_id = augmented_thread_id(thread.thread_id, fold_index);
    out.provenance = Provenance::augmented(thread.thread_id, fold_index);
    AugmentStats local;
    local.threads = 1;
    for (std::size_t i : selected) {
        ++local.tweets_selected;
        const PreprocessedText& original = texts[i];
        PreprocessedText replaced =
            substitute_tweet(original, text_key(original), candidates, rng, vocab, strategy.token_fraction);
        if (replaced.tokens == original.tokens) {
            ++local.tweets_unchanged;
            continue;
        }
        out.tweets[i].text = replaced.joined();
    }
    if (stats) *stats += local;
    return out;
}

OversamplePlan plan_oversample(std::size_t n_label, std::size_t n, int fold_cap) {
    OversamplePlan plan;
    if (n == 0) return plan;
    if (n_label == 0) {
        throw UsageError("cannot oversample a label with no threads");
    }
    const std::size_t full = n / n_label;
    plan.n_random = n % n_label;
    plan.n_fold = std::min<std::size_t>(full, static_cast<std::size_t>(fold_cap));
    plan.deficit = n - plan.n_fold * n_label - plan.n_random;
    return plan;
}

std::vector<Thread> oversample_label(std::span<const Thread> threads, std::size_t n,
                                     const AugmentationStrategy& strategy, const CandidateTable& candidates,
                                     std::uint64_t seed, std::size_t workers, AugmentStats* stats) {
    strategy.validate();
    if (n == 0) return {};
    const std::size_t n_label = threads.size();
    const OversamplePlan plan = plan_oversample(n_label, n, strategy.fold_cap);

    struct Job {
        std::size_t thread;
        int fold;
    };
    std::vector<Job> jobs;
    jobs.reserve(n);
    std::vector<int> next_fold(n_label, 1);
    Rng select(combine_seed(seed, "select"));
    std::vector<bool> extra(n_label, false);
    for (std::size_t i : select.sample_distinct(n_label, plan.n_random)) extra[i] = true;
    for (std::size_t i = 0; i < n_label; ++i) {
        for (std::size_t f = 0; f < plan.n_fold; ++f) jobs.push_back({i, next_fold[i]++});
        if (extra[i]) jobs.push_back({i, next_fold[i]++});
    }
    for (std::size_t remaining = plan.deficit; remaining > 0;) {
        const std::size_t m = std::min(remaining, n_label);
        auto picks = select.sample_distinct(n_label, m);
        std::sort(picks.begin(), picks.end());
        for (std::size_t i : picks) jobs.push_back({i, next_fold[i]++});
        remaining -= m;
    }

    std::vector<Thread> out(jobs.size());
    std::vector<AugmentStats> job_stats(jobs.size());
    parallel_for(jobs.size(), workers, [&](std::size_t j) {
        const Thread& parent = threads[jobs[j].thread];
        Rng rng(augmentation_stream_seed(strategy.seed, parent.thread_id, jobs[j].fold));
        out[j] = augment_thread(parent, strategy, candidates, rng, jobs[j].fold, &job_stats[j]);
    });
    if (stats) {
        for (const auto& s : job_stats) *stats += s;
    }
    return out;
}

Dataset oversample_dataset(const Dataset& dataset, const AugmentationStrategy& strategy,
                           const CandidateTable& candidates, std::size_t workers, OversampleReport* report) {
    strategy.validate();
    const std::size_t classes = num_classes(dataset.scheme);
    Dataset out;
    out.scheme = dataset.scheme;
    for (const auto& [event, threads] : dataset.events) {
        std::vector<std::vector<Thread>> by_label(classes);
        for (const Thread& t : threads) {
            if (t.provenance.is_augmented()) {
                throw UsageError("oversample_dataset expects original threads only; " + t.thread_id +
                                 " is augmented");
            }
            by_label[class_index(t.label)].push_back(t);
        }
        std::size_t n_max = 0;
        for (const auto& group : by_label) n_max = std::max(n_max, group.size());

        auto& bucket = out.events[event];
        bucket = threads;
        std::vector<std::size_t> added(classes, 0);
        for (std::size_t c = 0; c < classes; ++c) {
            const auto& group = by_label[c];
            if (group.empty() || group.size() == n_max) continue;
            const std::uint64_t label_seed =
                combine_seed(combine_seed(strategy.seed, event), to_string(label_from_index(dataset.scheme, c).value));
            AugmentStats stats;
            auto generated =
                oversample_label(group, n_max - group.size(), strategy, candidates, label_seed, workers, &stats);
            added[c] = generated.size();
            std::move(generated.begin(), generated.end(), std::back_inserter(bucket));
            if (report) report->stats += stats;
        }
        if (report) report->added[event] = std::move(added);
    }
    return out;
}

}  // namespace threadforge
