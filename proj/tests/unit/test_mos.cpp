#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "threadforge/common/error.hpp"
#include "threadforge/data/graph.hpp"
#include "threadforge/data/jsonl.hpp"
#include "threadforge/data/validate.hpp"
#include "threadforge/features/features.hpp"
#include "threadforge/mos/candidates.hpp"
#include "threadforge/mos/mos.hpp"

using namespace threadforge;
using namespace threadforge::testing;

namespace {

using Tokens = std::vector<std::string>;

Thread influence_fixture() {
    return make_thread("t", "ev", binary(LabelValue::rumour),
                       {make_tweet(1, "@USER HTTPURL", 0), make_tweet(2, "the earth is flat", 5, 1),
                        make_tweet(3, "no way \xF0\x9F\x98\x82", 9, 1)});
}

PreprocessedText text_of(Tokens tokens) {
    PreprocessedText p;
    for (auto& t : tokens) {
        p.keyword_mask.push_back(is_keyword(t));
        p.tokens.push_back(std::move(t));
    }
    return p;
}

std::size_t changed_tweets(const Thread& a, const Thread& b) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.tweets.size(); ++i) n += a.tweets[i].text != b.tweets[i].text;
    return n;
}

std::string serialize(const Dataset& d) {
    std::ostringstream out;
    write_threads(out, d, 0);
    return out.str();
}

}  // namespace

TEST_SUITE("influence") {
    TEST_CASE("weights are tokens minus keywords") {
        const auto dist = influence_weights(influence_fixture());
        CHECK(dist.weights == std::vector<double>{0, 4, 2});
        CHECK(dist.normalized[0] == 0.0);
        CHECK(dist.normalized[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
        CHECK(dist.normalized[2] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    }

    TEST_CASE("singleton and all-keyword threads") {
        auto single = make_thread("s", "ev", binary(LabelValue::rumour), {make_tweet(1, "hello world", 0)});
        CHECK(influence_weights(single).normalized == std::vector<double>{1.0});

        const std::vector<PreprocessedText> keywords = {text_of({"HTTPURL"}), text_of({"@USER", ":fire:"}),
                                                        text_of({})};
        const auto dist = influence_weights(keywords);
        CHECK(dist.normalized == std::vector<double>{0.5, 0.5, 0.0});
        const std::vector<PreprocessedText> empty = {text_of({}), text_of({})};
        CHECK(influence_weights(empty).normalized == std::vector<double>{0.5, 0.5});
    }
}

TEST_SUITE("substitution") {
    TEST_CASE("candidate path takes the top candidate that differs from the original") {
        const auto p = text_of({"the", "earth", "is", "flat"});
        CandidateTable c;
        c.add(text_key(p), 3, {"round", "flat"});
        Rng rng(1);
        CHECK(substitute_tweet(p, text_key(p), c, rng).tokens == Tokens{"the", "earth", "is", "round"});

        CandidateTable same_first;
        same_first.add(text_key(p), 3, {"flat", "round"});
        CHECK(substitute_tweet(p, text_key(p), same_first, rng).tokens == Tokens{"the", "earth", "is", "round"});
    }

    TEST_CASE("keyword tokens are never modified") {
        const auto p = text_of({"HTTPURL", "@USER", ":fire:"});
        CandidateTable c;
        c.add(text_key(p), 0, {"link"});
        Rng rng(2);
        CHECK(substitute_tweet(p, text_key(p), c, rng, std::vector<std::string>{"a", "b"}) == p);

        const auto mixed = text_of({"HTTPURL", "look", "@USER", "here", "now"});
        for (int i = 0; i < 50; ++i) {
            const auto out = substitute_tweet(mixed, 0, {}, rng, std::vector<std::string>{"here", "look", "now", "x"});
            CHECK(out.tokens[0] == "HTTPURL");
            CHECK(out.tokens[2] == "@USER");
            CHECK(out.keyword_mask == mixed.keyword_mask);
            std::size_t changed = 0;
            for (std::size_t k = 0; k < 5; ++k) changed += out.tokens[k] != mixed.tokens[k];
            CHECK(changed == 1);  // max(1, round(0.15 * 3))
        }
    }

    TEST_CASE("vocabulary fallback needs a distinct token") {
        const auto p = text_of({"alone"});
        Rng rng(3);
        CHECK(substitute_tweet(p, 0, {}, rng, std::vector<std::string>{"alone"}) == p);
        CHECK(substitute_tweet(p, 0, {}, rng, std::vector<std::string>{"alone", "other"}).tokens == Tokens{"other"});
    }

    TEST_CASE("substitution count follows the token fraction") {
        Tokens words;
        for (int i = 0; i < 20; ++i) words.push_back("w" + std::to_string(i));
        const auto p = text_of(words);
        std::vector<std::string> vocab = {"zz"};
        Rng rng(4);
        const auto out = substitute_tweet(p, 0, {}, rng, vocab, 0.15);
        std::size_t changed = 0;
        for (std::size_t k = 0; k < words.size(); ++k) changed += out.tokens[k] != words[k];
        CHECK(changed == 3);
    }
}

TEST_SUITE("augment_thread") {
    TEST_CASE("five tweets at p_aug 0.2 rewrite exactly one") {
        Rng gen(5);
        auto t = random_thread(gen, 5, "t5", "ev", binary(LabelValue::rumour), {"alpha", "beta", "gamma", "delta"});
        AugmentationStrategy s;
        CHECK(tweets_to_select(0.2, 5) == 1);
        CHECK(tweets_to_select(0.2, 2) == 1);
        CHECK(tweets_to_select(0.2, 13) == 3);
        for (int i = 0; i < 20; ++i) {
            Rng rng(100 + i);
            AugmentStats stats;
            const auto out = augment_thread(t, s, {}, rng, 1, &stats);
            CHECK(stats.tweets_selected == 1);
            CHECK(changed_tweets(t, out) + stats.tweets_unchanged == 1);
        }
    }

    TEST_CASE("structure, users, timestamps and label are preserved") {
        Rng gen(6);
        AugmentationStrategy s;
        s.p_aug = 0.5;
        for (int i = 0; i < 20; ++i) {
            auto t = random_thread(gen, 1 + gen.below(12), "p" + std::to_string(i), "ev",
                                   binary(LabelValue::non_rumour), {"a", "b", "c", "d", "e"});
            Rng rng(i);
            const auto out = augment_thread(t, s, {}, rng, 2);
            CHECK(out.thread_id == augmented_thread_id(t.thread_id, 2));
            CHECK(out.provenance == Provenance::augmented(t.thread_id, 2));
            CHECK(out.label == t.label);
            CHECK(out.event == t.event);
            CHECK(build_propagation_graph(out) == build_propagation_graph(t));
            REQUIRE(out.tweets.size() == t.tweets.size());
            for (std::size_t k = 0; k < t.tweets.size(); ++k) {
                CHECK(out.tweets[k].id == t.tweets[k].id);
                CHECK(out.tweets[k].created_at == t.tweets[k].created_at);
                CHECK(out.tweets[k].user == t.tweets[k].user);
            }
        }
    }

    TEST_CASE("nonrandom never picks the zero-weight tweet") {
        const Thread t = influence_fixture();
        AugmentationStrategy s;
        std::vector<PreprocessedText> texts;
        for (const auto& tw : t.tweets) texts.push_back(normalize_tweet(tw.text));
        for (int i = 0; i < 500; ++i) {
            Rng rng(i);
            const auto picks = select_tweets(texts, s, rng);
            REQUIRE(picks.size() == 1);
            CHECK(picks[0] != 0);
        }
    }

    TEST_CASE("fixed seed gives identical output") {
        const Thread t = influence_fixture();
        AugmentationStrategy s;
        Rng a(9), b(9);
        CHECK(augment_thread(t, s, {}, a, 1) == augment_thread(t, s, {}, b, 1));
    }
}

TEST_SUITE("oversampling") {
    TEST_CASE("plans") {
        auto plan = plan_oversample(458, 1163, 3);
        CHECK(plan.n_fold == 2);
        CHECK(plan.n_random == 247);
        CHECK(plan.deficit == 0);
        plan = plan_oversample(3, 2, 3);
        CHECK(plan.n_fold == 0);
        CHECK(plan.n_random == 2);
        plan = plan_oversample(4, 225, 3);
        CHECK(plan.n_fold == 3);
        CHECK(plan.n_fold * 4 + plan.n_random + plan.deficit == 225);
        CHECK_THROWS(plan_oversample(0, 5, 3));
    }

    TEST_CASE("two distinct threads augmented once each") {
        Dataset d = count_dataset(LabelScheme::binary, {{"e", {3, 0}}}, 1);
        AugmentationStrategy s;
        const auto out = oversample_label(d.events["e"], 2, s, {}, 77);
        REQUIRE(out.size() == 2);
        CHECK(out[0].provenance.parent_thread_id != out[1].provenance.parent_thread_id);
        CHECK(out[0].provenance.fold_index == 1);
        CHECK(out[1].provenance.fold_index == 1);
        CHECK(oversample_label(d.events["e"], 0, s, {}, 77).empty());
        CHECK_THROWS(oversample_label(std::span<const Thread>{}, 3, s, {}, 77));
    }

    TEST_CASE("fold cap deficit is filled exactly with unique ids") {
        Dataset d = count_dataset(LabelScheme::binary, {{"e", {4, 0}}}, 2);
        AugmentationStrategy s;
        const auto out = oversample_label(d.events["e"], 225, s, {}, 5);
        CHECK(out.size() == 225);
        std::set<std::string> ids;
        for (const auto& t : out) ids.insert(t.thread_id);
        CHECK(ids.size() == 225);
    }

    TEST_CASE("per-event balance") {
        Dataset d = count_dataset(LabelScheme::binary,
                                  {{"ottawashooting", {470, 420}}, {"ebola-essien", {14, 0}}, {"flat", {6, 6}}}, 3, 1, 3);
        AugmentationStrategy s;
        s.seed = 11;
        OversampleReport report;
        const Dataset out = oversample_dataset(d, s, {}, 2, &report);
        const auto v = validate_dataset(out);
        CHECK(v.ok());
        CHECK(v.label_counts.at("ottawashooting") == std::vector<std::size_t>{470, 470});
        CHECK(v.label_counts.at("ebola-essien") == std::vector<std::size_t>{14, 0});
        CHECK(v.label_counts.at("flat") == std::vector<std::size_t>{6, 6});
        CHECK(report.added.at("flat") == std::vector<std::size_t>{0, 0});
        CHECK(report.added.at("ottawashooting") == std::vector<std::size_t>{0, 50});
        // Originals come first and are untouched.
        for (const auto& [event, threads] : d.events)
            for (std::size_t i = 0; i < threads.size(); ++i) CHECK(out.events.at(event)[i] == threads[i]);
        CHECK_THROWS_AS(oversample_dataset(out, s, {}), UsageError);
    }

    TEST_CASE("output is independent of the worker count") {
        Dataset d = count_dataset(LabelScheme::ternary, {{"a", {9, 2, 4}}, {"b", {1, 7, 3}}}, 4);
        for (auto kind : {AugmentationStrategy::Kind::random, AugmentationStrategy::Kind::nonrandom}) {
            AugmentationStrategy s;
            s.kind = kind;
            s.seed = 21;
            CHECK(serialize(oversample_dataset(d, s, {}, 1)) == serialize(oversample_dataset(d, s, {}, 4)));
        }
    }
}

TEST_SUITE("candidate table") {
    TEST_CASE("CND1 round trip and validation") {
        CandidateTable c;
        c.add(42, 0, {"round", "square"});
        c.add(42, 7, {"caf"});
        c.add(7, 65535, {"x"});
        std::ostringstream out;
        write_candidate_table(out, c);
        const std::string bytes = out.str();
        CHECK(bytes.substr(0, 4) == "CND1");
        std::istringstream in(bytes);
        CHECK(read_candidate_table(in, "mem") == c);
        CHECK(c.has_text(42));
        CHECK_FALSE(c.has_text(43));
        REQUIRE(c.find(42, 7) != nullptr);
        CHECK(c.find(42, 8) == nullptr);

        CHECK_THROWS(c.add(1, 0, {}));
        CHECK_THROWS(c.add(1, 0, {"two words"}));
        std::istringstream cut(bytes.substr(0, bytes.size() - 2));
        CHECK_THROWS_AS(read_candidate_table(cut, "cut"), DataError);
    }
}
