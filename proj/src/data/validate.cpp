#include "threadforge/data/validate.hpp"

#include <sstream>
#include <unordered_map>

#include "threadforge/data/graph.hpp"

namespace threadforge {

std::size_t ValidationReport::count(const std::string& event, LabelValue value) const {
    auto it = label_counts.find(event);
    const Label label{scheme, value};
    if (it == label_counts.end() || !label_in_scheme(label)) {
        return 0;
    }
    return it->second[class_index(label)];
}

ValidationReport validate_dataset(const Dataset& dataset) {
    ValidationReport report;
    report.scheme = dataset.scheme;
    const std::size_t classes = num_classes(dataset.scheme);
    std::unordered_map<std::string, std::size_t> id_counts;
    for (const auto& [event, threads] : dataset.events) {
        auto& counts = report.label_counts[event];
        counts.assign(classes, 0);
        for (const Thread& t : threads) {
            auto flag = [&](std::string msg) { report.violations.push_back({event, t.thread_id, std::move(msg)}); };
            if (++id_counts[t.thread_id] == 2) {
                report.duplicate_ids.push_back(t.thread_id);
            }
            if (t.event != event) {
                flag("thread names event '" + t.event + "'");
            }
            if (t.label.scheme != dataset.scheme || !label_in_scheme(t.label)) {
                flag("label '" + std::string(to_string(t.label.value)) + "' outside the dataset scheme");
            } else {
                ++counts[class_index(t.label)];
            }
            if (t.provenance.is_augmented()) {
                ++report.augmented_counts[event];
                if (t.provenance.parent_thread_id.empty() || t.provenance.fold_index < 1) {
                    flag("augmented thread without parent id or fold index");
                }
            }
            if (auto problem = check_thread(t); !problem.empty()) {
                flag(problem);
            } else if (auto adj_problem = check_adjacency(build_propagation_graph(t)); !adj_problem.empty()) {
                flag(adj_problem);
            }
            bool missing = false;
            for (const Tweet& tw : t.tweets) {
                if (!tw.user) {
                    ++report.tweets_missing_user;
                    missing = true;
                }
            }
            report.threads_missing_user += missing ? 1 : 0;
        }
    }
    return report;
}

std::string format_report(const ValidationReport& r) {
    std::ostringstream out;
    out << "scheme: " << to_string(r.scheme) << '\n';
    for (const auto& [event, counts] : r.label_counts) {
        out << event << ':';
        for (std::size_t c = 0; c < counts.size(); ++c) {
            out << ' ' << to_string(label_from_index(r.scheme, c).value) << '=' << counts[c];
        }
        if (auto it = r.augmented_counts.find(event); it != r.augmented_counts.end()) {
            out << " (augmented=" << it->second << ')';
        }
        out << '\n';
    }
    out << "duplicate ids: " << r.duplicate_ids.size() << '\n';
    for (const auto& id : r.duplicate_ids) {
        out << "  " << id << '\n';
    }
    out << "violations: " << r.violations.size() << '\n';
    for (const auto& v : r.violations) {
        out << "  [" << v.event << "] " << v.thread_id << ": " << v.message << '\n';
    }
    out << "tweets missing user metadata: " << r.tweets_missing_user << " (in " << r.threads_missing_user
        << " threads)\n";
    return out.str();
}

}  // namespace threadforge
