#include "threadforge/preprocess/emoji_table.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "threadforge/common/error.hpp"
#include "threadforge/preprocess/normalize.hpp"

namespace threadforge {

extern const std::string_view kBuiltinEmojiTable;

EmojiTable EmojiTable::parse(std::string_view text) {
    EmojiTable table;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto eol = text.find('\n');
        std::string_view line = text.substr(0, eol);
        text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const auto tab = line.find('\t');
        if (tab == std::string_view::npos) {
            throw DataError("emoji table line " + std::to_string(line_no) + ": missing TAB");
        }
        std::string_view seq = line.substr(0, tab);
        std::string alias(line.substr(tab + 1));
        if (!is_emoji_alias(alias)) {
            throw DataError("emoji table line " + std::to_string(line_no) + ": bad alias '" + alias + "'");
        }
        std::u32string key;
        while (!seq.empty()) {
            const auto sp = seq.find(' ');
            std::string_view hex = seq.substr(0, sp);
            seq = sp == std::string_view::npos ? std::string_view{} : seq.substr(sp + 1);
            if (hex.empty()) {
                continue;
            }
            std::uint32_t cp = 0;
            auto [ptr, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), cp, 16);
            if (ec != std::errc() || ptr != hex.data() + hex.size() || cp > 0x10FFFF) {
                throw DataError("emoji table line " + std::to_string(line_no) + ": bad codepoint '" +
                                std::string(hex) + "'");
            }
            key.push_back(static_cast<char32_t>(cp));
        }
        if (key.empty()) {
            throw DataError("emoji table line " + std::to_string(line_no) + ": empty codepoint sequence");
        }
        table.first_codepoints_.insert(key.front());
        table.max_length_ = std::max(table.max_length_, key.size());
        table.entries_.insert_or_assign(std::move(key), std::move(alias));
    }
    return table;
}

EmojiTable EmojiTable::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open emoji table " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

const EmojiTable& EmojiTable::builtin() {
    static const EmojiTable table = parse(kBuiltinEmojiTable);
    return table;
}

std::optional<EmojiTable::Match> EmojiTable::match(std::u32string_view text) const {
    if (text.empty() || !first_codepoints_.contains(text.front())) {
        return std::nullopt;
    }
    for (std::size_t len = std::min(max_length_, text.size()); len > 0; --len) {
        auto it = entries_.find(std::u32string(text.substr(0, len)));
        if (it != entries_.end()) {
            return Match{len, &it->second};
        }
    }
    return std::nullopt;
}

}  // namespace threadforge
