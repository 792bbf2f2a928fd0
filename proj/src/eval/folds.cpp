#include "threadforge/eval/folds.hpp"

#include <cmath>
#include <set>
#include <unordered_set>

#include "threadforge/common/error.hpp"

namespace threadforge::eval {

std::vector<Fold> loocv_folds(const Dataset& originals, const Dataset& training_pool) {
    if (originals.events.size() < 2) {
        throw DataError("leave-one-event-out needs at least two events, found " +
                        std::to_string(originals.events.size()));
    }
    for (const auto& [event, threads] : originals.events) {
        for (const auto& t : threads) {
            if (t.provenance.kind != Provenance::Kind::original) {
                throw DataError("event " + event + ": thread " + t.thread_id +
                                " is augmented; evaluation threads must be originals");
            }
        }
    }
    for (const auto& [event, _] : training_pool.events) {
        if (!originals.events.contains(event)) {
            throw DataError("training pool event " + event + " is not in the original dataset");
        }
    }

    std::vector<Fold> folds;
    folds.reserve(originals.events.size());
    for (const auto& [test_event, test_threads] : originals.events) {
        Fold fold;
        fold.test_event = test_event;
        for (const auto& t : test_threads) fold.test_threads.push_back(&t);
        for (const auto& [event, threads] : training_pool.events) {
            if (event == test_event) continue;
            for (const auto& t : threads) fold.train_threads.push_back(&t);
        }
        folds.push_back(std::move(fold));
    }
    return folds;
}

std::vector<LeakageViolation> audit_folds(const std::vector<Fold>& folds) {
    std::vector<LeakageViolation> out;
    for (const auto& fold : folds) {
        std::unordered_set<std::string> test_ids;
        for (const Thread* t : fold.test_threads) {
            test_ids.insert(t->thread_id);
            if (t->provenance.kind != Provenance::Kind::original) {
                out.push_back({fold.test_event, t->thread_id, "augmented thread in the test set"});
            }
            if (t->event != fold.test_event) {
                out.push_back({fold.test_event, t->thread_id, "test thread from event " + t->event});
            }
        }
        for (const Thread* t : fold.train_threads) {
            if (t->event == fold.test_event) {
                out.push_back({fold.test_event, t->thread_id, "training thread from the test event"});
            } else if (test_ids.contains(t->thread_id)) {
                out.push_back({fold.test_event, t->thread_id, "thread id shared with the test set"});
            } else if (t->provenance.kind == Provenance::Kind::augmented &&
                       test_ids.contains(t->provenance.parent_thread_id)) {
                out.push_back({fold.test_event, t->thread_id,
                               "augmentation of test thread " + t->provenance.parent_thread_id});
            }
        }
    }
    return out;
}

std::vector<double> default_schedule() {
    return {0, 0.5, 1, 1.5, 2, 3, 4, 6, 8, 10, 12, 16, 20, 24, 36, 48, 72};
}

void validate_schedule(const std::vector<double>& delays) {
    if (delays.empty()) throw UsageError("checkpoint schedule is empty");
    for (std::size_t i = 0; i < delays.size(); ++i) {
        if (!std::isfinite(delays[i]) || delays[i] < 0.0) {
            throw UsageError("checkpoint schedule: delay " + std::to_string(delays[i]) + " is not a non-negative number");
        }
        if (i > 0 && !(delays[i] > delays[i - 1])) throw UsageError("checkpoint schedule must be strictly increasing");
    }
}

Thread early_cohort(const Thread& thread, double delay_hours) {
    Thread out = thread;
    out.tweets.clear();
    if (thread.tweets.empty()) return out;
    const std::int64_t origin = thread.tweets.front().created_at;
    std::set<TweetId> kept;
    for (const auto& tw : thread.tweets) {
        const bool is_source = !tw.parent_id.has_value();
        // Compared in hours so a delay computed as elapsed / 3600 keeps that reply.
        const bool in_window = static_cast<double>(tw.created_at - origin) / 3600.0 <= delay_hours;
        const bool parent_kept = is_source || kept.contains(*tw.parent_id);
        if (is_source || (in_window && parent_kept)) {
            out.tweets.push_back(tw);
            kept.insert(tw.id);
        }
    }
    return out;
}

}  // namespace threadforge::eval
