#pragma once

#include <string>
#include <vector>

#include "threadforge/data/types.hpp"

namespace threadforge::eval {

struct Fold {
    std::string test_event;
    std::vector<const Thread*> train_threads;  // every other event of the training pool
    std::vector<const Thread*> test_threads;   // originals of the held-out event
};

// One fold per event of `originals`, in event order. `training_pool` is either
// `originals` itself or the output of oversample_dataset on it. Throws
// DataError for fewer than two events, augmented threads in `originals`, or
// pool events missing from `originals`.
std::vector<Fold> loocv_folds(const Dataset& originals, const Dataset& training_pool);

struct LeakageViolation {
    std::string test_event;
    std::string thread_id;
    std::string reason;
};

// Provenance scan: training threads must not come from, or be derived from,
// any thread of the fold's test event; test threads must be originals.
std::vector<LeakageViolation> audit_folds(const std::vector<Fold>& folds);

std::vector<double> default_schedule();
// Throws UsageError unless strictly increasing, finite and non-negative.
void validate_schedule(const std::vector<double>& delays);

// The source plus every reply posted at most `delay_hours` after it. Replies
// whose parent falls outside the cohort are dropped with it.
Thread early_cohort(const Thread& thread, double delay_hours);

}  // namespace threadforge::eval
