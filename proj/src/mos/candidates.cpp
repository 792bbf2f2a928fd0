#include "threadforge/mos/candidates.hpp"

#include <fstream>
#include <limits>

#include "threadforge/common/binary_io.hpp"
#include "threadforge/common/error.hpp"

namespace threadforge {

void CandidateTable::add(std::uint64_t text_key, std::uint16_t token_index, std::vector<std::string> substitutes) {
    if (substitutes.empty()) {
        throw UsageError("candidate lists must be non-empty");
    }
    if (substitutes.size() > std::numeric_limits<std::uint8_t>::max()) {
        throw UsageError("candidate lists are limited to 255 entries");
    }
    for (const auto& s : substitutes) {
        if (s.empty() || s.find_first_of(" \t\r\n") != std::string::npos) {
            throw UsageError("substitute '" + s + "' is not a single token");
        }
    }
    entries_.insert_or_assign({text_key, token_index}, std::move(substitutes));
}

const std::vector<std::string>* CandidateTable::find(std::uint64_t text_key, std::size_t token_index) const {
    if (token_index > std::numeric_limits<std::uint16_t>::max()) {
        return nullptr;
    }
    auto it = entries_.find({text_key, static_cast<std::uint16_t>(token_index)});
    return it == entries_.end() ? nullptr : &it->second;
}

bool CandidateTable::has_text(std::uint64_t text_key) const {
    auto it = entries_.lower_bound({text_key, 0});
    return it != entries_.end() && it->first.first == text_key;
}

CandidateTable read_candidate_table(std::istream& in, const std::string& name) {
    binio::expect_magic(in, "CND1", name);
    CandidateTable table;
    const auto count = binio::read_le<std::uint64_t>(in, "CND1 count");
    for (std::uint64_t r = 0; r < count; ++r) {
        const auto key = binio::read_le<std::uint64_t>(in, "CND1 text key");
        const auto index = binio::read_le<std::uint16_t>(in, "CND1 token index");
        const auto k = binio::read_le<std::uint8_t>(in, "CND1 k");
        std::vector<std::string> subs;
        subs.reserve(k);
        for (std::uint8_t i = 0; i < k; ++i) {
            const auto len = binio::read_le<std::uint16_t>(in, "CND1 token length");
            subs.push_back(binio::read_bytes(in, len, "CND1 token"));
        }
        try {
            table.add(key, index, std::move(subs));
        } catch (const UsageError& e) {
            throw DataError(name + ": record " + std::to_string(r) + ": " + e.what());
        }
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        throw DataError(name + ": trailing bytes after " + std::to_string(count) + " CND1 records");
    }
    return table;
}

CandidateTable load_candidate_table(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open candidate table " + path.string());
    }
    return read_candidate_table(in, path.string());
}

void write_candidate_table(std::ostream& out, const CandidateTable& table) {
    binio::write_magic(out, "CND1");
    binio::write_le<std::uint64_t>(out, table.size());
    for (const auto& [key, subs] : table.entries()) {
        binio::write_le<std::uint64_t>(out, key.first);
        binio::write_le<std::uint16_t>(out, key.second);
        binio::write_le<std::uint8_t>(out, static_cast<std::uint8_t>(subs.size()));
        for (const auto& s : subs) {
            if (s.size() > std::numeric_limits<std::uint16_t>::max()) {
                throw UsageError("substitute token longer than 65535 bytes");
            }
            binio::write_le<std::uint16_t>(out, static_cast<std::uint16_t>(s.size()));
            out.write(s.data(), static_cast<std::streamsize>(s.size()));
        }
    }
}

void save_candidate_table(const std::filesystem::path& path, const CandidateTable& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot open " + path.string() + " for writing");
    }
    write_candidate_table(out, table);
}

}  // namespace threadforge
