#include "threadforge/data/types.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "threadforge/common/error.hpp"

namespace threadforge {

std::size_t num_classes(LabelScheme scheme) noexcept { return scheme == LabelScheme::binary ? 2 : 3; }

bool label_in_scheme(const Label& label) noexcept {
    switch (label.value) {
        case LabelValue::rumour:
        case LabelValue::non_rumour:
            return label.scheme == LabelScheme::binary;
        default:
            return label.scheme == LabelScheme::ternary;
    }
}

std::size_t class_index(const Label& label) {
    if (!label_in_scheme(label)) {
        throw DataError("label '" + std::string(to_string(label.value)) + "' is not part of the " +
                        std::string(to_string(label.scheme)) + " scheme");
    }
    switch (label.value) {
        case LabelValue::rumour: return 0;
        case LabelValue::non_rumour: return 1;
        case LabelValue::true_: return 0;
        case LabelValue::false_: return 1;
        case LabelValue::unverified: return 2;
    }
    return 0;
}

Label label_from_index(LabelScheme scheme, std::size_t index) {
    if (index >= num_classes(scheme)) {
        throw UsageError("class index out of range for scheme");
    }
    if (scheme == LabelScheme::binary) {
        return {scheme, index == 0 ? LabelValue::rumour : LabelValue::non_rumour};
    }
    static constexpr LabelValue kTernary[] = {LabelValue::true_, LabelValue::false_, LabelValue::unverified};
    return {scheme, kTernary[index]};
}

std::string_view to_string(LabelScheme scheme) noexcept {
    return scheme == LabelScheme::binary ? "binary" : "ternary";
}

std::string_view to_string(LabelValue value) noexcept {
    switch (value) {
        case LabelValue::rumour: return "rumour";
        case LabelValue::non_rumour: return "non_rumour";
        case LabelValue::true_: return "true";
        case LabelValue::false_: return "false";
        case LabelValue::unverified: return "unverified";
    }
    return "?";
}

std::optional<LabelScheme> parse_scheme(std::string_view s) noexcept {
    if (s == "binary") return LabelScheme::binary;
    if (s == "ternary") return LabelScheme::ternary;
    return std::nullopt;
}

std::optional<LabelValue> parse_label_value(std::string_view s) noexcept {
    if (s == "rumour") return LabelValue::rumour;
    if (s == "non_rumour") return LabelValue::non_rumour;
    if (s == "true") return LabelValue::true_;
    if (s == "false") return LabelValue::false_;
    if (s == "unverified") return LabelValue::unverified;
    return std::nullopt;
}

std::size_t Dataset::thread_count() const noexcept {
    std::size_t n = 0;
    for (const auto& [_, threads] : events) {
        n += threads.size();
    }
    return n;
}

void canonicalize_order(Thread& thread) {
    auto root = std::find_if(thread.tweets.begin(), thread.tweets.end(),
                             [](const Tweet& t) { return !t.parent_id.has_value(); });
    if (root != thread.tweets.end()) {
        std::rotate(thread.tweets.begin(), root, root + 1);
    }
    if (thread.tweets.size() > 1) {
        std::stable_sort(thread.tweets.begin() + 1, thread.tweets.end(), [](const Tweet& a, const Tweet& b) {
            if (a.created_at != b.created_at) return a.created_at < b.created_at;
            return a.id < b.id;
        });
    }
}

std::string check_thread(const Thread& thread) {
    if (thread.tweets.empty()) {
        return "thread has no tweets";
    }
    if (thread.tweets.front().parent_id) {
        return "first tweet " + std::to_string(thread.tweets.front().id) + " has a parent; source must come first";
    }
    std::unordered_map<TweetId, std::size_t> index;
    for (std::size_t i = 0; i < thread.tweets.size(); ++i) {
        const Tweet& t = thread.tweets[i];
        if (!index.emplace(t.id, i).second) {
            return "duplicate tweet id " + std::to_string(t.id);
        }
        if (i > 0 && !t.parent_id) {
            return "tweet " + std::to_string(t.id) + " is a second root";
        }
    }
    for (std::size_t i = 1; i < thread.tweets.size(); ++i) {
        const Tweet& prev = thread.tweets[i - 1];
        const Tweet& t = thread.tweets[i];
        if (i > 1 && (prev.created_at > t.created_at || (prev.created_at == t.created_at && prev.id > t.id))) {
            return "replies out of order at tweet " + std::to_string(t.id);
        }
        auto parent = index.find(*t.parent_id);
        if (parent == index.end()) {
            return "tweet " + std::to_string(t.id) + " references missing parent " + std::to_string(*t.parent_id);
        }
        if (thread.tweets[parent->second].created_at > t.created_at) {
            return "tweet " + std::to_string(t.id) + " is older than its parent";
        }
    }
    // Every reply must reach the source through parent links.
    std::vector<int> state(thread.tweets.size(), 0);  // 0 unknown, 1 visiting, 2 rooted
    state[0] = 2;
    for (std::size_t start = 1; start < thread.tweets.size(); ++start) {
        std::vector<std::size_t> path;
        std::size_t cur = start;
        while (state[cur] == 0) {
            state[cur] = 1;
            path.push_back(cur);
            cur = index.at(*thread.tweets[cur].parent_id);
        }
        if (state[cur] == 1) {
            return "reply cycle through tweet " + std::to_string(thread.tweets[cur].id);
        }
        for (std::size_t p : path) {
            state[p] = 2;
        }
    }
    return {};
}

}  // namespace threadforge
