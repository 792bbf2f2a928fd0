#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

namespace threadforge {

// Maps emoji codepoint sequences to ":alias:" tokens. Text format: one
// "<hex codepoints separated by spaces><TAB>:alias:" per line; lines starting
// with '#' are comments.
class EmojiTable {
public:
    struct Match {
        std::size_t length = 0;  // codepoints consumed
        const std::string* alias = nullptr;
    };

    static EmojiTable parse(std::string_view text);
    static EmojiTable load(const std::filesystem::path& path);
    // Table compiled into the library from data/emoji_aliases.tsv.
    static const EmojiTable& builtin();

    // Longest entry that is a prefix of `text`, if any.
    std::optional<Match> match(std::u32string_view text) const;

    std::size_t size() const noexcept { return entries_.size(); }

private:
    std::unordered_map<std::u32string, std::string> entries_;
    std::unordered_set<char32_t> first_codepoints_;
    std::size_t max_length_ = 0;
};

}  // namespace threadforge
