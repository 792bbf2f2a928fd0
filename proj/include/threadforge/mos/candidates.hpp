#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace threadforge {

// Ranked single-token substitutes per (text key, token index).
class CandidateTable {
public:
    using Key = std::pair<std::uint64_t, std::uint16_t>;

    void add(std::uint64_t text_key, std::uint16_t token_index, std::vector<std::string> substitutes);
    const std::vector<std::string>* find(std::uint64_t text_key, std::size_t token_index) const;
    bool has_text(std::uint64_t text_key) const;

    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    const std::map<Key, std::vector<std::string>>& entries() const noexcept { return entries_; }

    friend bool operator==(const CandidateTable&, const CandidateTable&) = default;

private:
    std::map<Key, std::vector<std::string>> entries_;
};

// CND1: "CND1", u64 count, count x (u64 text key, u16 token index, u8 k,
// k x (u16 byte length, UTF-8 bytes)), little-endian.
CandidateTable read_candidate_table(std::istream& in, const std::string& source_name);
CandidateTable load_candidate_table(const std::filesystem::path& path);
void write_candidate_table(std::ostream& out, const CandidateTable& table);
void save_candidate_table(const std::filesystem::path& path, const CandidateTable& table);

}  // namespace threadforge
