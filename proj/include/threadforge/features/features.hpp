#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "threadforge/common/error.hpp"
#include "threadforge/data/graph.hpp"
#include "threadforge/data/types.hpp"
#include "threadforge/nn/matrix.hpp"
#include "threadforge/preprocess/normalize.hpp"

namespace threadforge {

inline constexpr std::size_t kUserFeatureCount = 4;
inline constexpr std::size_t kDefaultHashDim = 64;

// [ceil(log10 max(tweets,1)), ceil(log10 max(listed,1)),
//  floor(log10(max(followers,1) / max(following,1))), verified]
std::array<double, kUserFeatureCount> user_features(const UserProfile& user);

// Join key between tweets and embedding/candidate tables: FNV-1a 64 of the
// space-joined normalized tokens.
std::uint64_t text_key(const PreprocessedText& text);

// Thrown by a file-backed provider when a text key has no stored vector.
class EmbeddingMiss : public DataError {
public:
    explicit EmbeddingMiss(std::uint64_t key);
    std::uint64_t key() const noexcept { return key_; }

private:
    std::uint64_t key_;
};

// EMB1: "EMB1", u32 dim, u64 count, count x (u64 key, dim x f32), little-endian.
struct EmbeddingTable {
    std::uint32_t dim = 0;
    std::vector<std::uint64_t> keys;   // file order
    std::vector<float> values;         // keys.size() * dim
};

EmbeddingTable read_embedding_table(std::istream& in, const std::string& source_name);
EmbeddingTable load_embedding_table(const std::filesystem::path& path);
void write_embedding_table(std::ostream& out, const EmbeddingTable& table);
void save_embedding_table(const std::filesystem::path& path, const EmbeddingTable& table);

class EmbeddingProvider {
public:
    enum class Kind { file_backed, hash_fallback };

    static EmbeddingProvider hash(std::size_t dim = kDefaultHashDim, std::uint64_t seed = 0);
    // With fallback_to_hash, misses are embedded by the hash scheme at the table's dim.
    static EmbeddingProvider from_table(EmbeddingTable table, bool fallback_to_hash = false);

    Kind kind() const noexcept { return kind_; }
    std::size_t dim() const noexcept { return dim_; }
    bool contains(std::uint64_t key) const;

    std::vector<double> embed(const PreprocessedText& text) const;

private:
    std::vector<double> hash_embed(const PreprocessedText& text) const;

    Kind kind_ = Kind::hash_fallback;
    std::size_t dim_ = kDefaultHashDim;
    std::uint64_t seed_ = 0;
    bool fallback_ = false;
    std::unordered_map<std::uint64_t, std::vector<float>> table_;
};

// Text keys of every tweet in `threads` that the provider cannot embed.
std::vector<std::uint64_t> missing_text_keys(const EmbeddingProvider& provider, const std::vector<const Thread*>& threads);

struct FeatureMatrix {
    nn::Matrix values;  // n x (dim + 4), row i = node i
    std::size_t n() const noexcept { return values.rows(); }
    std::size_t m() const noexcept { return values.cols(); }
};

FeatureMatrix assemble_feature_matrix(const Thread& thread, const EmbeddingProvider& provider);

}  // namespace threadforge
