#include "threadforge/preprocess/normalize.hpp"

#include <algorithm>

namespace threadforge {

namespace {

bool is_space(char32_t c) {
    switch (c) {
        case U' ': case U'\t': case U'\n': case U'\v': case U'\f': case U'\r':
        case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
        case 0x202F: case 0x205F: case 0x3000:
            return true;
        default:
            return c >= 0x2000 && c <= 0x200A;
    }
}

bool is_ascii_alnum(char32_t c) {
    return (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z') || (c >= U'0' && c <= U'9');
}

bool is_handle_char(char32_t c) { return is_ascii_alnum(c) || c == U'_'; }

bool is_alias_char(char32_t c) { return (c >= U'a' && c <= U'z') || (c >= U'0' && c <= U'9') || c == U'_'; }

// Non-ASCII codepoints that are not emoji or spaces count as word characters,
// so accented words stay in one token until the ASCII filter runs.
bool is_word_char(char32_t c) { return is_handle_char(c) || (c >= 0x80 && !is_space(c)); }

bool is_joiner(char32_t c) { return c == U'\'' || c == U'-' || c == 0x2019; }

char32_t ascii_lower(char32_t c) { return (c >= U'A' && c <= U'Z') ? c + 32 : c; }

bool starts_with_ci(std::u32string_view s, std::string_view prefix) {
    if (s.size() < prefix.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        if (ascii_lower(s[i]) != static_cast<char32_t>(prefix[i])) return false;
    }
    return true;
}

// An explicit scheme starts a URL even when glued to a preceding word
// ("...breakinghttp://t.co/x"); "www." only at a word boundary.
std::size_t find_url(std::u32string_view chunk) {
    for (std::size_t p = 0; p < chunk.size(); ++p) {
        auto rest = chunk.substr(p);
        if (starts_with_ci(rest, "http://") || starts_with_ci(rest, "https://")) return p;
        if ((p == 0 || !is_ascii_alnum(chunk[p - 1])) && starts_with_ci(rest, "www.")) return p;
    }
    return std::u32string_view::npos;
}

struct RawToken {
    std::u32string text;
    bool keyword = false;  // already a placeholder or alias
};

class Tokenizer {
public:
    Tokenizer(std::u32string_view segment, const EmojiTable* emoji) : s_(segment), emoji_(emoji) {}

    void run(std::vector<RawToken>& out) {
        while (i_ < s_.size()) {
            if (auto m = emoji_match()) {
                out.push_back({decode_utf8(*m->alias), true});
                i_ += m->length;
                continue;
            }
            const char32_t c = s_[i_];
            const bool after_word = i_ > 0 && is_word_char(s_[i_ - 1]);
            if (c == U'@') {
                if (!after_word && i_ + 1 < s_.size() && is_handle_char(s_[i_ + 1])) {
                    ++i_;
                    while (i_ < s_.size() && is_handle_char(s_[i_])) ++i_;
                    out.push_back({decode_utf8(kUserPlaceholder), true});
                } else {
                    // A bare '@' is not a mention; drop it so only @USER starts with '@'.
                    ++i_;
                }
                continue;
            }
            if (c == U':' ) {
                std::size_t j = i_ + 1;
                while (j < s_.size() && is_alias_char(s_[j])) ++j;
                if (j > i_ + 1 && j < s_.size() && s_[j] == U':') {
                    out.push_back({std::u32string(s_.substr(i_, j + 1 - i_)), true});
                    i_ = j + 1;
                    continue;
                }
            }
            if (c == U'#' && i_ + 1 < s_.size() && is_word_char(s_[i_ + 1]) && !starts_emoji(i_ + 1)) {
                const std::size_t start = i_++;
                word_run();
                out.push_back({std::u32string(s_.substr(start, i_ - start)), false});
                continue;
            }
            if (is_word_char(c)) {
                const std::size_t start = i_;
                word_run();
                out.push_back({std::u32string(s_.substr(start, i_ - start)), false});
                continue;
            }
            // Punctuation: a run of one repeated character.
            const std::size_t start = i_;
            while (i_ < s_.size() && s_[i_] == c) ++i_;
            out.push_back({std::u32string(s_.substr(start, i_ - start)), false});
        }
    }

private:
    std::optional<EmojiTable::Match> emoji_match() const {
        if (!emoji_) return std::nullopt;
        return emoji_->match(s_.substr(i_));
    }

    bool starts_emoji(std::size_t at) const { return emoji_ && emoji_->match(s_.substr(at)).has_value(); }

    // Word characters, with ' - joining two word characters.
    void word_run() {
        while (i_ < s_.size()) {
            if (starts_emoji(i_)) break;
            if (is_word_char(s_[i_])) {
                ++i_;
            } else if (is_joiner(s_[i_]) && i_ + 1 < s_.size() && is_word_char(s_[i_ + 1]) &&
                       !starts_emoji(i_ + 1)) {
                i_ += 2;
            } else {
                break;
            }
        }
    }

    std::u32string_view s_;
    const EmojiTable* emoji_;
    std::size_t i_ = 0;
};

void tokenize(std::u32string_view text, const EmojiTable* emoji, std::vector<RawToken>& out) {
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_space(text[i])) ++i;
        const std::size_t start = i;
        while (i < text.size() && !is_space(text[i])) ++i;
        if (i == start) break;
        std::u32string_view chunk = text.substr(start, i - start);
        const std::size_t url = find_url(chunk);
        Tokenizer(chunk.substr(0, url), emoji).run(out);
        if (url != std::u32string_view::npos) {
            out.push_back({decode_utf8(kUrlPlaceholder), true});
        }
    }
}

}  // namespace

std::u32string decode_utf8(std::string_view text) {
    std::u32string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        const auto b0 = static_cast<unsigned char>(text[i]);
        std::size_t len = 0;
        char32_t cp = 0;
        if (b0 < 0x80) {
            len = 1;
            cp = b0;
        } else if ((b0 & 0xE0) == 0xC0) {
            len = 2;
            cp = b0 & 0x1F;
        } else if ((b0 & 0xF0) == 0xE0) {
            len = 3;
            cp = b0 & 0x0F;
        } else if ((b0 & 0xF8) == 0xF0) {
            len = 4;
            cp = b0 & 0x07;
        }
        bool ok = len > 0 && i + len <= text.size();
        for (std::size_t k = 1; ok && k < len; ++k) {
            const auto b = static_cast<unsigned char>(text[i + k]);
            ok = (b & 0xC0) == 0x80;
            cp = (cp << 6) | (b & 0x3F);
        }
        if (!ok) {
            out.push_back(0xFFFD);
            ++i;
            continue;
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

std::string PreprocessedText::joined() const {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

std::size_t PreprocessedText::keyword_count() const noexcept {
    return static_cast<std::size_t>(std::count(keyword_mask.begin(), keyword_mask.end(), true));
}

bool is_emoji_alias(std::string_view token) noexcept {
    if (token.size() < 3 || token.front() != ':' || token.back() != ':') return false;
    return std::all_of(token.begin() + 1, token.end() - 1,
                       [](char c) { return is_alias_char(static_cast<unsigned char>(c)); });
}

bool is_keyword(std::string_view token) noexcept {
    return token == kUrlPlaceholder || token == kUserPlaceholder || is_emoji_alias(token);
}

PreprocessedText normalize_tweet(std::string_view text) { return normalize_tweet(text, EmojiTable::builtin()); }

PreprocessedText normalize_tweet(std::string_view text, const EmojiTable& emoji) {
    std::vector<RawToken> raw;
    tokenize(decode_utf8(text), &emoji, raw);

    PreprocessedText out;
    auto emit = [&](std::string token) {
        const bool keyword = is_keyword(token);
        out.tokens.push_back(std::move(token));
        out.keyword_mask.push_back(keyword);
    };
    std::vector<RawToken> ascii_parts;
    for (const RawToken& tok : raw) {
        std::u32string ascii;
        for (char32_t c : tok.text) {
            if (c < 0x80) ascii.push_back(c);
        }
        if (ascii.empty()) {
            continue;
        }
        if (tok.keyword || ascii.size() == tok.text.size()) {
            std::string s;
            for (char32_t c : ascii) s.push_back(static_cast<char>(c));
            emit(std::move(s));
            continue;
        }
        // Removing characters can expose new token boundaries; split again.
        ascii_parts.clear();
        tokenize(ascii, nullptr, ascii_parts);
        for (const RawToken& part : ascii_parts) {
            std::string s;
            for (char32_t c : part.text) s.push_back(static_cast<char>(c));
            emit(std::move(s));
        }
    }
    return out;
}

}  // namespace threadforge
