#include "fixtures.hpp"

#include <atomic>
#include <ctime>
#include <fstream>

#include <nlohmann/json.hpp>
#include <unistd.h>

namespace threadforge::testing {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

UserProfile default_user() { return UserProfile{120, 3, 200, 150, false}; }

Tweet make_tweet(TweetId id, std::string text, std::int64_t created_at, std::optional<TweetId> parent,
                 std::optional<UserProfile> user) {
    Tweet t;
    t.id = id;
    t.text = std::move(text);
    t.created_at = created_at;
    t.parent_id = parent;
    t.user = user;
    return t;
}

Thread make_thread(std::string thread_id, std::string event, Label label, std::vector<Tweet> tweets) {
    Thread t;
    t.thread_id = std::move(thread_id);
    t.event = std::move(event);
    t.label = label;
    t.tweets = std::move(tweets);
    canonicalize_order(t);
    return t;
}

Label binary(LabelValue v) { return Label{LabelScheme::binary, v}; }
Label ternary(LabelValue v) { return Label{LabelScheme::ternary, v}; }

namespace {

std::atomic<TweetId> next_tweet_id{1000};

std::string random_text(Rng& rng, const std::vector<std::string>& words, std::size_t min_len, std::size_t max_len) {
    const std::size_t len = min_len + rng.below(max_len - min_len + 1);
    std::string text;
    for (std::size_t i = 0; i < len; ++i) {
        if (i) text += ' ';
        text += words[rng.below(words.size())];
    }
    return text;
}

const std::vector<std::string>& neutral_words() {
    static const std::vector<std::string> w = {"the", "news", "report", "people", "today", "said", "city", "update"};
    return w;
}

}  // namespace

Thread random_thread(Rng& rng, std::size_t n, const std::string& thread_id, const std::string& event, Label label,
                     const std::vector<std::string>& words) {
    std::vector<Tweet> tweets;
    std::vector<std::int64_t> times;
    const std::int64_t t0 = 1'420'000'000 + static_cast<std::int64_t>(rng.below(1'000'000));
    for (std::size_t i = 0; i < n; ++i) {
        const TweetId id = next_tweet_id++;
        std::optional<TweetId> parent;
        std::int64_t at = t0;
        if (i > 0) {
            const std::size_t p = rng.below(i);
            parent = tweets[p].id;
            at = times[p] + 1 + static_cast<std::int64_t>(rng.below(3600));
        }
        UserProfile user{rng.below(100000), rng.below(500), rng.below(20000), rng.below(5000), rng.below(10) == 0};
        tweets.push_back(make_tweet(id, random_text(rng, words, 2, 8), at, parent, user));
        times.push_back(at);
    }
    return make_thread(thread_id, event, label, std::move(tweets));
}

Dataset count_dataset(LabelScheme scheme, const std::map<std::string, std::vector<std::size_t>>& counts,
                      std::uint64_t seed, std::size_t min_tweets, std::size_t max_tweets) {
    Dataset d;
    d.scheme = scheme;
    Rng rng(seed);
    std::vector<std::string> words = neutral_words();
    for (const char* w : {"flat", "earth", "police", "storm", "claim", "video", "photo", "breaking"}) words.push_back(w);
    for (const auto& [event, per_class] : counts) {
        auto& bucket = d.events[event];
        std::size_t k = 0;
        for (std::size_t c = 0; c < per_class.size(); ++c) {
            for (std::size_t i = 0; i < per_class[c]; ++i, ++k) {
                const std::size_t n = min_tweets + rng.below(max_tweets - min_tweets + 1);
                bucket.push_back(random_thread(rng, n, event + "-" + std::to_string(k), event,
                                               label_from_index(scheme, c), words));
            }
        }
    }
    return d;
}

Dataset separable_dataset(std::size_t threads, std::size_t events, std::uint64_t seed, std::size_t minority_every) {
    static const std::vector<std::string> class0 = {"hoax", "fake", "debunked", "false", "rumor", "unconfirmed"};
    static const std::vector<std::string> class1 = {"official", "confirmed", "statement", "verified", "press",
                                                    "announced"};
    Dataset d;
    d.scheme = LabelScheme::binary;
    Rng rng(seed);
    for (std::size_t i = 0; i < threads; ++i) {
        const std::size_t c = i % minority_every == 0 ? 0 : 1;
        const std::string event = "event" + std::to_string(i % events);
        const std::size_t n = 2 + rng.below(5);
        d.events[event].push_back(random_thread(rng, n, event + "-" + std::to_string(i), event,
                                                label_from_index(LabelScheme::binary, c), c == 0 ? class0 : class1));
    }
    return d;
}

Dataset late_signal_dataset(std::size_t threads, std::size_t events, double signal_after_hours, std::uint64_t seed) {
    static const std::vector<std::string> class0 = {"hoax", "fake", "debunked", "false"};
    static const std::vector<std::string> class1 = {"official", "confirmed", "statement", "verified"};
    Dataset d;
    d.scheme = LabelScheme::binary;
    Rng rng(seed);
    const auto late = static_cast<std::int64_t>(signal_after_hours * 3600.0);
    for (std::size_t i = 0; i < threads; ++i) {
        const std::size_t c = i % 2;
        const std::string event = "event" + std::to_string(i % events);
        const std::int64_t t0 = 1'420'000'000 + static_cast<std::int64_t>(i) * 100000;
        std::vector<Tweet> tweets;
        const TweetId root = next_tweet_id++;
        tweets.push_back(make_tweet(root, random_text(rng, neutral_words(), 3, 6), t0));
        const std::size_t early_replies = 1 + rng.below(3);
        for (std::size_t r = 0; r < early_replies; ++r) {
            tweets.push_back(make_tweet(next_tweet_id++, random_text(rng, neutral_words(), 2, 5),
                                        t0 + 60 + static_cast<std::int64_t>(rng.below(1800)), root));
        }
        const std::size_t late_replies = 2 + rng.below(3);
        for (std::size_t r = 0; r < late_replies; ++r) {
            tweets.push_back(make_tweet(next_tweet_id++, random_text(rng, c == 0 ? class0 : class1, 3, 6),
                                        t0 + late + 60 + static_cast<std::int64_t>(rng.below(3600)), root));
        }
        d.events[event].push_back(make_thread(event + "-" + std::to_string(i), event,
                                              label_from_index(LabelScheme::binary, c), std::move(tweets)));
    }
    return d;
}

std::string twitter_time(std::int64_t epoch_seconds) {
    const std::time_t t = static_cast<std::time_t>(epoch_seconds);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[64];
    std::strftime(buf, sizeof buf, "%a %b %d %H:%M:%S +0000 %Y", &tm);
    return buf;
}

namespace {

json tweet_json(const Tweet& t) {
    json j;
    j["id"] = t.id;
    j["id_str"] = std::to_string(t.id);
    j["text"] = t.text;
    j["created_at"] = twitter_time(t.created_at);
    if (t.user) {
        j["user"] = {{"statuses_count", t.user->tweet_count},
                     {"listed_count", t.user->listed_count},
                     {"followers_count", t.user->followers},
                     {"friends_count", t.user->following},
                     {"verified", t.user->verified}};
    }
    return j;
}

json structure_of(const Thread& t, TweetId id) {
    json children = json::object();
    for (const auto& tw : t.tweets)
        if (tw.parent_id == id) children[std::to_string(tw.id)] = structure_of(t, tw.id);
    if (children.empty()) return json::array();
    return children;
}

void write_json(const fs::path& path, const json& j) {
    fs::create_directories(path.parent_path());
    std::ofstream(path) << j.dump();
}

}  // namespace

void write_archive_thread(const fs::path& event_dir, const ArchiveThread& a) {
    const Thread& t = a.thread;
    const Tweet& source = t.tweets.front();
    const fs::path dir = event_dir / std::to_string(source.id);
    write_json(dir / "source-tweets" / (std::to_string(source.id) + ".json"), tweet_json(source));
    fs::create_directories(dir / "reactions");
    for (std::size_t i = 1; i < t.tweets.size(); ++i)
        write_json(dir / "reactions" / (std::to_string(t.tweets[i].id) + ".json"), tweet_json(t.tweets[i]));
    if (!a.structure_override.empty()) {
        std::ofstream(dir / "structure.json") << a.structure_override;
    } else {
        json s;
        s[std::to_string(source.id)] = structure_of(t, source.id);
        write_json(dir / "structure.json", s);
    }
    json ann;
    ann["is_rumour"] = a.is_rumour;
    if (a.misinformation) ann["misinformation"] = *a.misinformation;
    if (a.true_flag) ann["true"] = *a.true_flag;
    write_json(dir / "annotation.json", ann);
}

fs::path temp_dir(const std::string& name) {
    static std::atomic<int> counter{0};
    const fs::path p = fs::temp_directory_path() /
                       ("threadforge-" + name + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace threadforge::testing
