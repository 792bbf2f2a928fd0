#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "threadforge/common/random.hpp"
#include "threadforge/data/types.hpp"

namespace threadforge::testing {

UserProfile default_user();

Tweet make_tweet(TweetId id, std::string text, std::int64_t created_at, std::optional<TweetId> parent = std::nullopt,
                 std::optional<UserProfile> user = default_user());

// Canonicalizes tweet order.
Thread make_thread(std::string thread_id, std::string event, Label label, std::vector<Tweet> tweets);

Label binary(LabelValue v);
Label ternary(LabelValue v);

// Random tree of n tweets: each reply picks an earlier tweet as parent and is
// posted 1..3600 s after it. Texts are drawn from `words`.
Thread random_thread(Rng& rng, std::size_t n, const std::string& thread_id, const std::string& event, Label label,
                     const std::vector<std::string>& words);

// Events with the given per-class counts (class index order of `scheme`).
// Thread ids are "<event>-<k>", tweet ids globally unique.
Dataset count_dataset(LabelScheme scheme, const std::map<std::string, std::vector<std::size_t>>& counts,
                      std::uint64_t seed, std::size_t min_tweets = 2, std::size_t max_tweets = 6);

// Two-class dataset whose classes use disjoint vocabularies, so hash
// embeddings form separable clusters. Threads are spread round-robin over
// `events` event names.
Dataset separable_dataset(std::size_t threads, std::size_t events, std::uint64_t seed,
                          std::size_t minority_every = 2);

// Threads whose source tweets are uninformative and whose late replies
// (posted after `signal_after_hours`) carry class-specific words.
Dataset late_signal_dataset(std::size_t threads, std::size_t events, double signal_after_hours, std::uint64_t seed);

// PHEME-style archive writer.
struct ArchiveThread {
    Thread thread;
    std::string is_rumour = "rumour";          // annotation value
    std::optional<int> misinformation;         // annotation flags
    std::optional<int> true_flag;
    std::string structure_override;            // raw structure.json when non-empty
};

void write_archive_thread(const std::filesystem::path& event_dir, const ArchiveThread& t);

// Twitter-style timestamp text for a UTC epoch second.
std::string twitter_time(std::int64_t epoch_seconds);

// Fresh empty directory under the system temp dir.
std::filesystem::path temp_dir(const std::string& name);

}  // namespace threadforge::testing
