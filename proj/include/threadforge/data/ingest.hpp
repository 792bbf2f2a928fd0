#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "threadforge/data/types.hpp"

namespace threadforge {

struct SkippedThread {
    std::filesystem::path path;
    std::string reason;
};

struct IngestResult {
    Dataset dataset;
    std::vector<SkippedThread> skipped;  // sorted by path
};

// Reads a PHEME-style archive:
//   <root>/<event>[-all-rnr-threads]/[rumours|non-rumours/]<thread>/
//       source-tweets/<id>.json, reactions/*.json, structure.json, annotation.json
// Threads that are malformed or lack a label for `scheme` are skipped and
// reported. Files that exist but cannot be read raise DataError.
IngestResult ingest_pheme(const std::filesystem::path& root, LabelScheme scheme, std::size_t threads = 0);

// "Wed Jan 07 11:06:08 +0000 2015" -> seconds since the epoch (UTC).
std::optional<std::int64_t> parse_twitter_time(std::string_view text);

// Event directory name with the archive's "-all-rnr-threads" suffix removed.
std::string event_name_from_dir(std::string_view dir_name);

}  // namespace threadforge
