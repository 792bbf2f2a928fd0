#include "threadforge/data/ingest.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>
#include <variant>

#include <nlohmann/json.hpp>

#include "threadforge/common/error.hpp"
#include "threadforge/common/parallel.hpp"

namespace threadforge {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// Howard Hinnant's days_from_civil.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

template <typename T>
bool parse_int(std::string_view s, T& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

// Skip reasons are carried as this exception type inside a thread directory.
struct SkipThread {
    std::string reason;
};

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in || !fs::is_regular_file(path)) {
        throw DataError("cannot read " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) {
        throw DataError("error while reading " + path.string());
    }
    return ss.str();
}

json parse_json_file(const fs::path& path, const char* what) {
    const std::string text = read_file(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw SkipThread{std::string("malformed ") + what + " record " + path.filename().string() + ": " + e.what()};
    }
}

std::optional<std::uint64_t> json_u64(const json& j) {
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer()) {
        auto v = j.get<std::int64_t>();
        if (v >= 0) return static_cast<std::uint64_t>(v);
        return std::nullopt;
    }
    if (j.is_string()) {
        std::uint64_t v = 0;
        if (parse_int(j.get_ref<const std::string&>(), v)) return v;
    }
    return std::nullopt;
}

std::optional<bool> json_flag(const json& j) {
    if (j.is_boolean()) return j.get<bool>();
    if (auto v = json_u64(j)) return *v != 0;
    if (j.is_string()) {
        const auto& s = j.get_ref<const std::string&>();
        if (s == "true" || s == "True") return true;
        if (s == "false" || s == "False") return false;
    }
    return std::nullopt;
}

Tweet parse_tweet(const json& j, const fs::path& path) {
    Tweet t;
    std::optional<std::uint64_t> id;
    if (j.contains("id_str")) id = json_u64(j["id_str"]);
    if (!id && j.contains("id")) id = json_u64(j["id"]);
    if (!id) {
        throw SkipThread{"tweet record " + path.filename().string() + " has no id"};
    }
    t.id = *id;
    if (j.contains("full_text") && j["full_text"].is_string()) {
        t.text = j["full_text"].get<std::string>();
    } else if (j.contains("text") && j["text"].is_string()) {
        t.text = j["text"].get<std::string>();
    }
    std::optional<std::int64_t> ts;
    if (auto it = j.find("created_at"); it != j.end()) {
        if (it->is_string()) {
            ts = parse_twitter_time(it->get_ref<const std::string&>());
        } else if (it->is_number_integer()) {
            ts = it->get<std::int64_t>();
        }
    }
    if (!ts) {
        throw SkipThread{"tweet " + std::to_string(t.id) + " has no parseable created_at"};
    }
    t.created_at = *ts;
    if (auto it = j.find("user"); it != j.end() && it->is_object()) {
        const json& u = *it;
        auto count = [&](const char* key) -> std::optional<std::uint64_t> {
            auto f = u.find(key);
            return f == u.end() ? std::nullopt : json_u64(*f);
        };
        auto tweets = count("statuses_count");
        auto listed = count("listed_count");
        auto followers = count("followers_count");
        auto following = count("friends_count");
        std::optional<bool> verified = u.contains("verified") ? json_flag(u["verified"]) : std::nullopt;
        if (tweets && listed && followers && following && verified) {
            t.user = UserProfile{*tweets, *listed, *followers, *following, *verified};
        }
    }
    return t;
}

// PHEME structure.json: nested objects keyed by tweet id; leaves are [] or {}.
void walk_structure(const json& node, std::optional<TweetId> parent,
                    std::unordered_map<TweetId, std::optional<TweetId>>& parents, std::vector<TweetId>& roots) {
    if (node.is_array()) {
        if (!node.empty()) {
            throw SkipThread{"structure record has a non-empty list node"};
        }
        return;
    }
    if (!node.is_object()) {
        throw SkipThread{"structure record has an unexpected value type"};
    }
    for (const auto& [key, child] : node.items()) {
        TweetId id = 0;
        if (!parse_int(std::string_view(key), id)) {
            throw SkipThread{"structure record has a non-numeric id '" + key + "'"};
        }
        if (!parents.emplace(id, parent).second) {
            throw SkipThread{"structure record is cyclic: id " + key + " appears twice"};
        }
        if (!parent) {
            roots.push_back(id);
        }
        walk_structure(child, id, parents, roots);
    }
}

std::optional<Label> binary_label(const json& annotation, std::string& problem) {
    auto it = annotation.find("is_rumour");
    if (it == annotation.end()) {
        problem = "annotation has no is_rumour field";
        return std::nullopt;
    }
    const std::string value = it->is_string() ? it->get<std::string>() : it->dump();
    if (value == "rumour") return Label{LabelScheme::binary, LabelValue::rumour};
    if (value == "nonrumour" || value == "non-rumour" || value == "non_rumour") {
        return Label{LabelScheme::binary, LabelValue::non_rumour};
    }
    problem = "unknown is_rumour label '" + value + "'";
    return std::nullopt;
}

std::optional<Label> ternary_label(const json& annotation, std::string& problem) {
    auto rumour = annotation.find("is_rumour");
    if (rumour == annotation.end() || !rumour->is_string() || rumour->get<std::string>() != "rumour") {
        problem = "no veracity annotation (thread is not annotated as a rumour)";
        return std::nullopt;
    }
    auto flag = [&](const char* key) -> std::optional<std::uint64_t> {
        auto f = annotation.find(key);
        if (f == annotation.end()) return std::nullopt;
        if (auto v = json_u64(*f); v && *v <= 1) return v;
        problem = std::string("unknown ") + key + " value " + f->dump();
        throw SkipThread{problem};
    };
    const auto misinformation = flag("misinformation");
    const auto is_true = flag("true");
    LabelValue value = LabelValue::unverified;
    if (misinformation && is_true) {
        if (*misinformation == 1 && *is_true == 1) {
            problem = "annotation marks the rumour both true and misinformation";
            return std::nullopt;
        }
        if (*is_true == 1) value = LabelValue::true_;
        else if (*misinformation == 1) value = LabelValue::false_;
    } else if (misinformation) {
        if (*misinformation == 1) value = LabelValue::false_;
    } else if (is_true) {
        if (*is_true == 1) value = LabelValue::true_;
    }
    return Label{LabelScheme::ternary, value};
}

bool is_thread_dir(const fs::path& dir) {
    return fs::is_directory(dir / "source-tweets") || fs::exists(dir / "structure.json");
}

void collect_thread_dirs(const fs::path& dir, int depth, std::vector<fs::path>& out) {
    if (is_thread_dir(dir)) {
        out.push_back(dir);
        return;
    }
    if (depth == 0) {
        return;
    }
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_directory() && entry.path().filename().string().front() != '.') {
            collect_thread_dirs(entry.path(), depth - 1, out);
        }
    }
}

std::vector<fs::path> json_files(const fs::path& dir) {
    std::vector<fs::path> files;
    if (!fs::is_directory(dir)) {
        return files;
    }
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto& p = entry.path();
        if (entry.is_regular_file() && p.extension() == ".json" && p.filename().string().front() != '.') {
            files.push_back(p);
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

Thread load_thread(const fs::path& dir, const std::string& event, LabelScheme scheme) {
    const auto sources = json_files(dir / "source-tweets");
    if (sources.size() != 1) {
        throw SkipThread{"expected exactly one source-tweet record, found " + std::to_string(sources.size())};
    }
    if (!fs::exists(dir / "structure.json")) {
        throw SkipThread{"missing structure.json"};
    }
    if (!fs::exists(dir / "annotation.json")) {
        throw SkipThread{"missing annotation.json"};
    }

    const json annotation = parse_json_file(dir / "annotation.json", "annotation");
    std::string problem;
    auto label = scheme == LabelScheme::binary ? binary_label(annotation, problem) : ternary_label(annotation, problem);
    if (!label) {
        throw SkipThread{problem};
    }

    Tweet source = parse_tweet(parse_json_file(sources.front(), "source-tweet"), sources.front());
    std::unordered_map<TweetId, Tweet> records;
    for (const auto& path : json_files(dir / "reactions")) {
        Tweet t = parse_tweet(parse_json_file(path, "reaction"), path);
        records.emplace(t.id, std::move(t));
    }

    std::unordered_map<TweetId, std::optional<TweetId>> parents;
    std::vector<TweetId> roots;
    walk_structure(parse_json_file(dir / "structure.json", "structure"), std::nullopt, parents, roots);
    if (roots.size() != 1 || roots.front() != source.id) {
        throw SkipThread{"structure root does not match source tweet " + std::to_string(source.id)};
    }

    Thread thread;
    thread.thread_id = std::to_string(source.id);
    thread.event = event;
    thread.label = *label;
    thread.tweets.push_back(std::move(source));
    for (const auto& [id, parent] : parents) {
        if (!parent) {
            continue;
        }
        auto rec = records.find(id);
        if (rec == records.end()) {
            throw SkipThread{"structure references tweet " + std::to_string(id) + " with no reaction record"};
        }
        Tweet t = std::move(rec->second);
        t.parent_id = parent;
        thread.tweets.push_back(std::move(t));
    }
    canonicalize_order(thread);
    if (auto err = check_thread(thread); !err.empty()) {
        throw SkipThread{err};
    }
    return thread;
}

bool thread_id_less(const std::string& a, const std::string& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
}

}  // namespace

std::optional<std::int64_t> parse_twitter_time(std::string_view text) {
    // Www Mmm dd hh:mm:ss +zzzz yyyy
    static constexpr std::array<std::string_view, 12> kMonths = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                                                 "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
    if (text.size() != 30 || text[3] != ' ' || text[7] != ' ' || text[10] != ' ' || text[13] != ':' ||
        text[16] != ':' || text[19] != ' ' || text[25] != ' ') {
        return std::nullopt;
    }
    auto month_it = std::find(kMonths.begin(), kMonths.end(), text.substr(4, 3));
    if (month_it == kMonths.end()) {
        return std::nullopt;
    }
    unsigned day = 0, hour = 0, minute = 0, second = 0;
    int year = 0, offset = 0;
    if (!parse_int(text.substr(8, 2), day) || !parse_int(text.substr(11, 2), hour) ||
        !parse_int(text.substr(14, 2), minute) || !parse_int(text.substr(17, 2), second) ||
        !parse_int(text.substr(26, 4), year) || !parse_int(text.substr(21, 4), offset)) {
        return std::nullopt;
    }
    const char sign = text[20];
    if ((sign != '+' && sign != '-') || day < 1 || day > 31 || hour > 23 || minute > 59 || second > 60) {
        return std::nullopt;
    }
    const unsigned month = static_cast<unsigned>(month_it - kMonths.begin()) + 1;
    const std::int64_t offset_seconds = (offset / 100) * 3600 + (offset % 100) * 60;
    const std::int64_t local = days_from_civil(year, month, day) * 86400 + hour * 3600 + minute * 60 + second;
    return sign == '+' ? local - offset_seconds : local + offset_seconds;
}

std::string event_name_from_dir(std::string_view dir_name) {
    constexpr std::string_view kSuffix = "-all-rnr-threads";
    if (dir_name.size() > kSuffix.size() && dir_name.substr(dir_name.size() - kSuffix.size()) == kSuffix) {
        dir_name.remove_suffix(kSuffix.size());
    }
    return std::string(dir_name);
}

IngestResult ingest_pheme(const fs::path& root, LabelScheme scheme, std::size_t threads) {
    if (!fs::is_directory(root)) {
        throw DataError("archive root " + root.string() + " is not a directory");
    }
    struct Job {
        fs::path dir;
        std::string event;
    };
    std::vector<fs::path> event_dirs;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory() && entry.path().filename().string().front() != '.') {
            event_dirs.push_back(entry.path());
        }
    }
    std::sort(event_dirs.begin(), event_dirs.end());
    std::vector<Job> jobs;
    for (const auto& event_dir : event_dirs) {
        std::vector<fs::path> dirs;
        collect_thread_dirs(event_dir, 2, dirs);
        std::sort(dirs.begin(), dirs.end());
        const std::string event = event_name_from_dir(event_dir.filename().string());
        for (auto& d : dirs) {
            jobs.push_back({std::move(d), event});
        }
    }

    std::vector<std::variant<Thread, SkippedThread>> outcomes(jobs.size());
    parallel_for(jobs.size(), threads, [&](std::size_t i) {
        try {
            outcomes[i] = load_thread(jobs[i].dir, jobs[i].event, scheme);
        } catch (const SkipThread& skip) {
            outcomes[i] = SkippedThread{jobs[i].dir, skip.reason};
        } catch (const json::exception& e) {
            outcomes[i] = SkippedThread{jobs[i].dir, std::string("malformed record: ") + e.what()};
        }
    });

    IngestResult result;
    result.dataset.scheme = scheme;
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        if (auto* skip = std::get_if<SkippedThread>(&outcomes[i])) {
            result.skipped.push_back(std::move(*skip));
            continue;
        }
        auto& thread = std::get<Thread>(outcomes[i]);
        if (!seen.insert(thread.thread_id).second) {
            result.skipped.push_back({jobs[i].dir, "duplicate thread id " + thread.thread_id});
            continue;
        }
        result.dataset.events[thread.event].push_back(std::move(thread));
    }
    for (auto& [_, list] : result.dataset.events) {
        std::sort(list.begin(), list.end(),
                  [](const Thread& a, const Thread& b) { return thread_id_less(a.thread_id, b.thread_id); });
    }
    return result;
}

}  // namespace threadforge
