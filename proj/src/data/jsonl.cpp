#include "threadforge/data/jsonl.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "threadforge/common/error.hpp"

namespace threadforge {

using ojson = nlohmann::ordered_json;

namespace {

ojson user_to_json(const std::optional<UserProfile>& user) {
    if (!user) {
        return nullptr;
    }
    ojson j;
    j["tweet_count"] = user->tweet_count;
    j["listed_count"] = user->listed_count;
    j["followers"] = user->followers;
    j["following"] = user->following;
    j["verified"] = user->verified;
    return j;
}

std::string dump(const ojson& j) {
    return j.dump(-1, ' ', false, ojson::error_handler_t::replace);
}

template <typename T>
T field(const ojson& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) {
        throw DataError(std::string("missing field '") + key + "'");
    }
    return it->get<T>();
}

}  // namespace

std::string thread_to_json(const Thread& thread) {
    ojson j;
    j["thread_id"] = thread.thread_id;
    j["event"] = thread.event;
    j["label"] = std::string(to_string(thread.label.value));
    ojson prov;
    if (thread.provenance.is_augmented()) {
        prov["kind"] = "augmented";
        prov["parent"] = thread.provenance.parent_thread_id;
        prov["fold"] = thread.provenance.fold_index;
    } else {
        prov["kind"] = "original";
    }
    j["provenance"] = std::move(prov);
    ojson tweets = ojson::array();
    for (const Tweet& t : thread.tweets) {
        ojson tj;
        tj["id"] = t.id;
        tj["parent_id"] = t.parent_id ? ojson(*t.parent_id) : ojson(nullptr);
        tj["created_at"] = t.created_at;
        tj["user"] = user_to_json(t.user);
        tj["text"] = t.text;
        tweets.push_back(std::move(tj));
    }
    j["tweets"] = std::move(tweets);
    return dump(j);
}

Thread thread_from_json(const std::string& line, LabelScheme scheme) {
    ojson j;
    try {
        j = ojson::parse(line);
    } catch (const ojson::parse_error& e) {
        throw DataError(std::string("invalid JSON: ") + e.what());
    }
    try {
        Thread thread;
        thread.thread_id = field<std::string>(j, "thread_id");
        thread.event = field<std::string>(j, "event");
        const auto label = field<std::string>(j, "label");
        auto value = parse_label_value(label);
        if (!value) {
            throw DataError("unknown label '" + label + "'");
        }
        thread.label = {scheme, *value};
        if (!label_in_scheme(thread.label)) {
            throw DataError("label '" + label + "' does not belong to the " + std::string(to_string(scheme)) +
                            " scheme");
        }
        const ojson& prov = j.at("provenance");
        if (field<std::string>(prov, "kind") == "augmented") {
            thread.provenance = Provenance::augmented(field<std::string>(prov, "parent"), field<int>(prov, "fold"));
        }
        for (const ojson& tj : j.at("tweets")) {
            Tweet t;
            t.id = field<TweetId>(tj, "id");
            if (!tj.at("parent_id").is_null()) {
                t.parent_id = tj.at("parent_id").get<TweetId>();
            }
            t.created_at = field<std::int64_t>(tj, "created_at");
            if (const ojson& uj = tj.at("user"); !uj.is_null()) {
                t.user = UserProfile{field<std::uint64_t>(uj, "tweet_count"), field<std::uint64_t>(uj, "listed_count"),
                                     field<std::uint64_t>(uj, "followers"), field<std::uint64_t>(uj, "following"),
                                     field<bool>(uj, "verified")};
            }
            t.text = field<std::string>(tj, "text");
            thread.tweets.push_back(std::move(t));
        }
        return thread;
    } catch (const ojson::exception& e) {
        throw DataError(std::string("malformed thread record: ") + e.what());
    }
}

void write_threads(std::ostream& out, const Dataset& dataset, std::uint64_t seed) {
    ojson header;
    header["format"] = kThreadsFormat;
    header["version"] = kThreadsFormatVersion;
    header["scheme"] = std::string(to_string(dataset.scheme));
    header["seed"] = seed;
    out << dump(header) << '\n';
    for (const auto& [event, threads] : dataset.events) {
        for (const Thread& t : threads) {
            if (t.event != event) {
                throw DataError("thread " + t.thread_id + " is filed under event '" + event + "' but names '" +
                                t.event + "'");
            }
            out << thread_to_json(t) << '\n';
        }
    }
}

Dataset read_threads(std::istream& in, const std::string& source_name, ThreadsHeader* header_out) {
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError(source_name + ": empty file, expected a threads header");
    }
    ThreadsHeader header;
    try {
        const ojson h = ojson::parse(line);
        if (h.value("format", "") != kThreadsFormat) {
            throw DataError(source_name + ": not a threads file");
        }
        if (h.value("version", 0) != kThreadsFormatVersion) {
            throw DataError(source_name + ": unsupported threads format version");
        }
        auto scheme = parse_scheme(h.value("scheme", ""));
        if (!scheme) {
            throw DataError(source_name + ": unknown label scheme in header");
        }
        header.scheme = *scheme;
        header.seed = h.value("seed", std::uint64_t{0});
    } catch (const ojson::exception& e) {
        throw DataError(source_name + ": invalid header: " + e.what());
    }
    Dataset dataset;
    dataset.scheme = header.scheme;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        try {
            Thread t = thread_from_json(line, header.scheme);
            dataset.events[t.event].push_back(std::move(t));
        } catch (const DataError& e) {
            throw DataError(source_name + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (header_out) {
        *header_out = header;
    }
    return dataset;
}

void save_threads(const std::filesystem::path& path, const Dataset& dataset, std::uint64_t seed) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot open " + path.string() + " for writing");
    }
    write_threads(out, dataset, seed);
    if (!out) {
        throw DataError("failed writing " + path.string());
    }
}

Dataset load_threads(const std::filesystem::path& path, ThreadsHeader* header) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    return read_threads(in, path.string(), header);
}

}  // namespace threadforge
