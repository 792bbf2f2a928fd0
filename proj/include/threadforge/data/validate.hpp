#pragma once

#include <map>
#include <string>
#include <vector>

#include "threadforge/data/types.hpp"

namespace threadforge {

struct Violation {
    std::string event;
    std::string thread_id;
    std::string message;
};

struct ValidationReport {
    LabelScheme scheme = LabelScheme::binary;
    // event -> class-indexed counts (original + augmented threads).
    std::map<std::string, std::vector<std::size_t>> label_counts;
    std::map<std::string, std::size_t> augmented_counts;
    std::vector<Violation> violations;
    std::vector<std::string> duplicate_ids;
    std::size_t tweets_missing_user = 0;
    std::size_t threads_missing_user = 0;

    bool ok() const noexcept { return violations.empty() && duplicate_ids.empty(); }
    std::size_t count(const std::string& event, LabelValue value) const;
};

ValidationReport validate_dataset(const Dataset& dataset);

// Human-readable multi-line summary.
std::string format_report(const ValidationReport& report);

}  // namespace threadforge
