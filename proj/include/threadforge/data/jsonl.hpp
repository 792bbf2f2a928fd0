#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "threadforge/data/types.hpp"

// Canonical `threads.jsonl` format: a header record followed by one thread per
// line. Field order is fixed so equal datasets serialize to identical bytes.
namespace threadforge {

inline constexpr const char* kThreadsFormat = "threadforge-threads";
inline constexpr int kThreadsFormatVersion = 1;

struct ThreadsHeader {
    LabelScheme scheme = LabelScheme::binary;
    std::uint64_t seed = 0;
};

std::string thread_to_json(const Thread& thread);
Thread thread_from_json(const std::string& line, LabelScheme scheme);

void write_threads(std::ostream& out, const Dataset& dataset, std::uint64_t seed);
Dataset read_threads(std::istream& in, const std::string& source_name, ThreadsHeader* header = nullptr);

void save_threads(const std::filesystem::path& path, const Dataset& dataset, std::uint64_t seed);
Dataset load_threads(const std::filesystem::path& path, ThreadsHeader* header = nullptr);

}  // namespace threadforge
