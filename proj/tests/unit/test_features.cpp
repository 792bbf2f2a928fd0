#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <sstream>

#include "fixtures.hpp"
#include "threadforge/common/hash.hpp"
#include "threadforge/features/features.hpp"

using namespace threadforge;
using namespace threadforge::testing;

namespace {

using Vec4 = std::array<double, kUserFeatureCount>;

double norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

Thread three_tweets() {
    return make_thread("1", "ev", binary(LabelValue::rumour),
                       {make_tweet(1, "the earth is flat", 10), make_tweet(2, "no way", 20, 1),
                        make_tweet(3, "source? HTTPURL", 30, 1)});
}

std::string to_bytes(const EmbeddingTable& t) {
    std::ostringstream out;
    write_embedding_table(out, t);
    return out.str();
}

}  // namespace

TEST_CASE("user behaviour features") {
    CHECK(user_features({1000, 99, 1000, 10, true}) == Vec4{3, 2, 2, 1});
    CHECK(user_features({0, 0, 0, 0, false}) == Vec4{0, 0, 0, 0});
    CHECK(user_features({1001, 10, 50, 100, false}) == Vec4{4, 1, -1, 0});
    // Exact at powers of ten and for huge counts.
    CHECK(user_features({10, 1, 1, 1000, false}) == Vec4{1, 0, -3, 0});
    CHECK(user_features({UINT64_MAX, 11, UINT64_MAX, 1, false}) == Vec4{20, 2, 19, 0});
    CHECK(user_features({1, 1, 1, UINT64_MAX, false})[2] == -20);
}

TEST_CASE("text key hashes the joined tokens") {
    const auto p = normalize_tweet("Check  this https://t.co/x");
    CHECK(text_key(p) == fnv1a64("Check this HTTPURL"));
    CHECK(text_key(normalize_tweet("")) == fnv1a64(""));
}

TEST_CASE("hash embeddings are deterministic unit vectors") {
    const auto provider = EmbeddingProvider::hash(16, 7);
    const auto p = normalize_tweet("storm hits the coast");
    const auto a = provider.embed(p);
    CHECK(a.size() == 16);
    CHECK(a == provider.embed(normalize_tweet("storm hits the coast")));
    CHECK(std::abs(norm(a) - 1.0) < 1e-6);
    CHECK(provider.embed(normalize_tweet("")) == std::vector<double>(16, 0.0));
    CHECK(a != EmbeddingProvider::hash(16, 8).embed(p));
    CHECK(a != provider.embed(normalize_tweet("storm hits the beach")));
}

TEST_CASE("EMB1 round trip is bit exact") {
    EmbeddingTable t;
    t.dim = 3;
    t.keys = {5, 0xFFFFFFFFFFFFFFFFULL};
    t.values = {0.1f, -2.5f, 3e-8f, 1.0f, 0.0f, -0.0f};
    const std::string bytes = to_bytes(t);
    CHECK(bytes.substr(0, 4) == "EMB1");
    CHECK(bytes.size() == 4 + 4 + 8 + 2 * (8 + 3 * 4));
    std::istringstream in(bytes);
    const auto back = read_embedding_table(in, "mem");
    CHECK(back.keys == t.keys);
    CHECK(std::memcmp(back.values.data(), t.values.data(), t.values.size() * sizeof(float)) == 0);

    const auto provider = EmbeddingProvider::from_table(back);
    CHECK(provider.kind() == EmbeddingProvider::Kind::file_backed);
    CHECK(provider.contains(5));
}

TEST_CASE("EMB1 rejects corrupt input") {
    EmbeddingTable t;
    t.dim = 2;
    t.keys = {1};
    t.values = {1.0f, 2.0f};
    const std::string good = to_bytes(t);

    std::istringstream magic("EMB2" + good.substr(4));
    CHECK_THROWS_AS(read_embedding_table(magic, "m"), DataError);
    std::istringstream truncated(good.substr(0, good.size() - 1));
    CHECK_THROWS_AS(read_embedding_table(truncated, "m"), DataError);
    std::istringstream trailing(good + "x");
    CHECK_THROWS_AS(read_embedding_table(trailing, "m"), DataError);

    t.values[1] = std::nanf("");
    std::istringstream nan(to_bytes(t));
    CHECK_THROWS_AS(read_embedding_table(nan, "m"), DataError);
}

TEST_CASE("file-backed misses name the key unless falling back to hashes") {
    const auto p = normalize_tweet("unknown text");
    EmbeddingTable t;
    t.dim = 4;
    t.keys = {text_key(normalize_tweet("known"))};
    t.values = {1, 2, 3, 4};
    const auto strict = EmbeddingProvider::from_table(t);
    CHECK(strict.embed(normalize_tweet("known")) == std::vector<double>{1, 2, 3, 4});
    try {
        strict.embed(p);
        FAIL("expected EmbeddingMiss");
    } catch (const EmbeddingMiss& e) {
        CHECK(e.key() == text_key(p));
    }
    const auto lenient = EmbeddingProvider::from_table(t, true);
    CHECK(lenient.embed(p).size() == 4);
    CHECK(std::abs(norm(lenient.embed(p)) - 1.0) < 1e-6);

    const Thread th = three_tweets();
    CHECK(missing_text_keys(strict, {&th}).size() == 3);
    CHECK(missing_text_keys(lenient, {&th}).empty());
}

TEST_CASE("feature matrix shape, ordering and user columns") {
    const auto provider = EmbeddingProvider::hash(8);
    const Thread t = three_tweets();
    const auto f = assemble_feature_matrix(t, provider);
    CHECK(f.n() == 3);
    CHECK(f.m() == 12);
    CHECK(f.values.all_finite());
    for (std::size_t r = 0; r < 3; ++r) {
        CHECK(f.values(r, 8) == f.values(0, 8));
        CHECK(f.values(r, 11) == f.values(0, 11));
    }

    auto shuffled = t;
    std::swap(shuffled.tweets[1], shuffled.tweets[2]);
    canonicalize_order(shuffled);
    CHECK(assemble_feature_matrix(shuffled, provider).values == f.values);

    auto anonymous = t;
    anonymous.tweets[1].user.reset();
    const auto g = assemble_feature_matrix(anonymous, provider);
    for (std::size_t c = 8; c < 12; ++c) CHECK(g.values(1, c) == 0.0);
}

TEST_CASE("embedding misses report the node index") {
    EmbeddingTable t;
    t.dim = 2;
    const auto strict = EmbeddingProvider::from_table(t);
    try {
        assemble_feature_matrix(three_tweets(), strict);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("node 0") != std::string::npos);
    }
}
