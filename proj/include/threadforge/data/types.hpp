#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace threadforge {

using TweetId = std::uint64_t;

struct UserProfile {
    std::uint64_t tweet_count = 0;
    std::uint64_t listed_count = 0;
    std::uint64_t followers = 0;
    std::uint64_t following = 0;
    bool verified = false;

    friend bool operator==(const UserProfile&, const UserProfile&) = default;
};

struct Tweet {
    TweetId id = 0;
    std::string text;
    std::int64_t created_at = 0;  // UTC seconds since the epoch
    std::optional<TweetId> parent_id;
    // Absent when the archive carried no user record for this tweet.
    std::optional<UserProfile> user;

    friend bool operator==(const Tweet&, const Tweet&) = default;
};

enum class LabelScheme { binary, ternary };

enum class LabelValue { rumour, non_rumour, true_, false_, unverified };

struct Label {
    LabelScheme scheme = LabelScheme::binary;
    LabelValue value = LabelValue::rumour;

    friend bool operator==(const Label&, const Label&) = default;
};

std::size_t num_classes(LabelScheme scheme) noexcept;
// Dense class index in [0, num_classes(scheme)); throws if value is not in the scheme.
std::size_t class_index(const Label& label);
Label label_from_index(LabelScheme scheme, std::size_t index);
bool label_in_scheme(const Label& label) noexcept;

std::string_view to_string(LabelScheme scheme) noexcept;
std::string_view to_string(LabelValue value) noexcept;
std::optional<LabelScheme> parse_scheme(std::string_view s) noexcept;
std::optional<LabelValue> parse_label_value(std::string_view s) noexcept;

struct Provenance {
    enum class Kind { original, augmented };
    Kind kind = Kind::original;
    std::string parent_thread_id;  // augmented only
    int fold_index = 0;            // augmented only, 1-based

    bool is_augmented() const noexcept { return kind == Kind::augmented; }
    static Provenance original() { return {}; }
    static Provenance augmented(std::string parent, int fold) {
        return {Kind::augmented, std::move(parent), fold};
    }

    friend bool operator==(const Provenance&, const Provenance&) = default;
};

// A source tweet followed by its replies ordered by (created_at, id).
struct Thread {
    std::string thread_id;
    std::vector<Tweet> tweets;
    std::string event;
    Label label;
    Provenance provenance;

    const Tweet& source() const { return tweets.front(); }

    friend bool operator==(const Thread&, const Thread&) = default;
};

struct Dataset {
    LabelScheme scheme = LabelScheme::binary;
    std::map<std::string, std::vector<Thread>> events;

    std::size_t thread_count() const noexcept;
    friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Puts the source first and replies in (created_at, id) order.
void canonicalize_order(Thread& thread);

// Returns an empty string when the thread satisfies every structural
// invariant, otherwise a description naming the offending tweet.
std::string check_thread(const Thread& thread);

}  // namespace threadforge
