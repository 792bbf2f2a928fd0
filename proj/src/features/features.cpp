#include "threadforge/features/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "threadforge/common/binary_io.hpp"
#include "threadforge/common/error.hpp"
#include "threadforge/common/hash.hpp"
#include "threadforge/common/random.hpp"

namespace threadforge {

namespace {

std::string hex_key(std::uint64_t key) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, key >>= 4) s[i] = kDigits[key & 0xF];
    return s;
}

// Exact integer ceil(log10(x)) for x >= 1; avoids libm rounding at powers of ten.
int ceil_log10(std::uint64_t x) {
    int digits = 0;
    std::uint64_t p = 1;
    while (p < x) {
        if (p > std::numeric_limits<std::uint64_t>::max() / 10) return digits + 1;
        p *= 10;
        ++digits;
    }
    return digits;
}

// Exact floor(log10(num / den)) for num, den >= 1, without overflow.
int floor_log10_ratio(std::uint64_t num, std::uint64_t den) {
    int k = 0;
    std::uint64_t scaled = num >= den ? den : num;
    if (num >= den) {
        // scaled * 10 <= num  <=>  scaled <= num / 10
        while (scaled <= num / 10) {
            scaled *= 10;
            ++k;
        }
        return k;
    }
    while (scaled < den) {
        --k;
        // scaled * 10 >= den  <=>  scaled > (den - 1) / 10
        if (scaled > (den - 1) / 10) break;
        scaled *= 10;
    }
    return k;
}

}  // namespace

std::array<double, kUserFeatureCount> user_features(const UserProfile& u) {
    return {static_cast<double>(ceil_log10(std::max<std::uint64_t>(u.tweet_count, 1))),
            static_cast<double>(ceil_log10(std::max<std::uint64_t>(u.listed_count, 1))),
            static_cast<double>(floor_log10_ratio(std::max<std::uint64_t>(u.followers, 1),
                                                  std::max<std::uint64_t>(u.following, 1))),
            u.verified ? 1.0 : 0.0};
}

std::uint64_t text_key(const PreprocessedText& text) { return fnv1a64(text.joined()); }

EmbeddingMiss::EmbeddingMiss(std::uint64_t key)
    : DataError("embedding table has no vector for text key " + hex_key(key)), key_(key) {}

EmbeddingTable read_embedding_table(std::istream& in, const std::string& name) {
    binio::expect_magic(in, "EMB1", name);
    EmbeddingTable table;
    table.dim = binio::read_le<std::uint32_t>(in, "EMB1 dim");
    if (table.dim == 0) {
        throw DataError(name + ": EMB1 dim must be positive");
    }
    const auto count = binio::read_le<std::uint64_t>(in, "EMB1 count");
    table.keys.reserve(count);
    table.values.reserve(count * table.dim);
    for (std::uint64_t r = 0; r < count; ++r) {
        table.keys.push_back(binio::read_le<std::uint64_t>(in, "EMB1 key"));
        for (std::uint32_t d = 0; d < table.dim; ++d) {
            const float v = binio::read_le<float>(in, "EMB1 vector");
            if (!std::isfinite(v)) {
                throw DataError(name + ": non-finite value in vector for key " + hex_key(table.keys.back()));
            }
            table.values.push_back(v);
        }
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        throw DataError(name + ": trailing bytes after " + std::to_string(count) + " EMB1 records");
    }
    return table;
}

EmbeddingTable load_embedding_table(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open embedding table " + path.string());
    }
    return read_embedding_table(in, path.string());
}

void write_embedding_table(std::ostream& out, const EmbeddingTable& table) {
    if (table.values.size() != table.keys.size() * table.dim) {
        throw ShapeError("embedding table values do not match keys x dim");
    }
    binio::write_magic(out, "EMB1");
    binio::write_le<std::uint32_t>(out, table.dim);
    binio::write_le<std::uint64_t>(out, table.keys.size());
    for (std::size_t r = 0; r < table.keys.size(); ++r) {
        binio::write_le<std::uint64_t>(out, table.keys[r]);
        for (std::uint32_t d = 0; d < table.dim; ++d) {
            binio::write_le<float>(out, table.values[r * table.dim + d]);
        }
    }
}

void save_embedding_table(const std::filesystem::path& path, const EmbeddingTable& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot open " + path.string() + " for writing");
    }
    write_embedding_table(out, table);
}

EmbeddingProvider EmbeddingProvider::hash(std::size_t dim, std::uint64_t seed) {
    if (dim == 0) {
        throw UsageError("embedding dim must be positive");
    }
    EmbeddingProvider p;
    p.kind_ = Kind::hash_fallback;
    p.dim_ = dim;
    p.seed_ = seed;
    return p;
}

EmbeddingProvider EmbeddingProvider::from_table(EmbeddingTable table, bool fallback_to_hash) {
    EmbeddingProvider p;
    p.kind_ = Kind::file_backed;
    p.dim_ = table.dim;
    p.fallback_ = fallback_to_hash;
    p.table_.reserve(table.keys.size());
    for (std::size_t r = 0; r < table.keys.size(); ++r) {
        auto begin = table.values.begin() + static_cast<std::ptrdiff_t>(r * table.dim);
        // First record wins for duplicated keys.
        p.table_.try_emplace(table.keys[r], begin, begin + table.dim);
    }
    return p;
}

bool EmbeddingProvider::contains(std::uint64_t key) const {
    return kind_ == Kind::hash_fallback || fallback_ || table_.contains(key);
}

std::vector<double> EmbeddingProvider::embed(const PreprocessedText& text) const {
    if (kind_ == Kind::hash_fallback) {
        return hash_embed(text);
    }
    const std::uint64_t key = text_key(text);
    auto it = table_.find(key);
    if (it == table_.end()) {
        if (fallback_) {
            return hash_embed(text);
        }
        throw EmbeddingMiss(key);
    }
    return {it->second.begin(), it->second.end()};
}

std::vector<double> EmbeddingProvider::hash_embed(const PreprocessedText& text) const {
    std::vector<double> sum(dim_, 0.0);
    std::vector<double> unit(dim_);
    for (const std::string& token : text.tokens) {
        Rng rng(combine_seed(seed_, fnv1a64(token)));
        double norm2 = 0.0;
        do {
            norm2 = 0.0;
            for (double& v : unit) {
                v = rng.uniform(-1.0, 1.0);
                norm2 += v * v;
            }
        } while (norm2 == 0.0);
        const double inv = 1.0 / std::sqrt(norm2);
        for (std::size_t d = 0; d < dim_; ++d) sum[d] += unit[d] * inv;
    }
    double norm2 = 0.0;
    for (double v : sum) norm2 += v * v;
    if (norm2 > 0.0) {
        const double inv = 1.0 / std::sqrt(norm2);
        for (double& v : sum) v *= inv;
    }
    return sum;
}

std::vector<std::uint64_t> missing_text_keys(const EmbeddingProvider& provider,
                                             const std::vector<const Thread*>& threads) {
    std::vector<std::uint64_t> missing;
    if (provider.kind() == EmbeddingProvider::Kind::hash_fallback) {
        return missing;
    }
    for (const Thread* t : threads) {
        for (const Tweet& tw : t->tweets) {
            const auto key = text_key(normalize_tweet(tw.text));
            if (!provider.contains(key)) missing.push_back(key);
        }
    }
    std::sort(missing.begin(), missing.end());
    missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
    return missing;
}

FeatureMatrix assemble_feature_matrix(const Thread& thread, const EmbeddingProvider& provider) {
    const std::size_t dim = provider.dim();
    FeatureMatrix f{nn::Matrix(thread.tweets.size(), dim + kUserFeatureCount)};
    for (std::size_t i = 0; i < thread.tweets.size(); ++i) {
        const Tweet& tweet = thread.tweets[i];
        std::vector<double> emb;
        try {
            emb = provider.embed(normalize_tweet(tweet.text));
        } catch (const EmbeddingMiss& e) {
            throw DataError("thread " + thread.thread_id + " node " + std::to_string(i) + ": " + e.what());
        }
        auto row = f.values.row(i);
        std::copy(emb.begin(), emb.end(), row.begin());
        const auto uf = user_features(tweet.user.value_or(UserProfile{}));
        std::copy(uf.begin(), uf.end(), row.begin() + static_cast<std::ptrdiff_t>(dim));
    }
    return f;
}

}  // namespace threadforge
