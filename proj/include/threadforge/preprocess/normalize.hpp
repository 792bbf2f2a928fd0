#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "threadforge/preprocess/emoji_table.hpp"

namespace threadforge {

inline constexpr std::string_view kUrlPlaceholder = "HTTPURL";
inline constexpr std::string_view kUserPlaceholder = "@USER";

struct PreprocessedText {
    std::vector<std::string> tokens;
    std::vector<bool> keyword_mask;  // same length as tokens

    std::string joined() const;
    std::size_t keyword_count() const noexcept;
    friend bool operator==(const PreprocessedText&, const PreprocessedText&) = default;
};

// Tweet-aware tokenization, then URL -> HTTPURL, @mention -> @USER,
// emoji -> :alias:, and removal of every remaining non-ASCII character.
// Case is preserved. Re-normalizing joined() returns the same tokens.
PreprocessedText normalize_tweet(std::string_view text);
PreprocessedText normalize_tweet(std::string_view text, const EmojiTable& emoji);

// True for HTTPURL, @USER and :alias: tokens (lowercase ASCII alias name).
bool is_keyword(std::string_view token) noexcept;
bool is_emoji_alias(std::string_view token) noexcept;

std::u32string decode_utf8(std::string_view text);

}  // namespace threadforge
