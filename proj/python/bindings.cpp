#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>
#include <sstream>

#include "app.hpp"
#include "threadforge/common/error.hpp"
#include "threadforge/common/hash.hpp"
#include "threadforge/data/jsonl.hpp"
#include "threadforge/eval/metrics.hpp"
#include "threadforge/features/features.hpp"
#include "threadforge/mos/candidates.hpp"
#include "threadforge/mos/mos.hpp"
#include "threadforge/preprocess/normalize.hpp"

namespace py = pybind11;
using namespace threadforge;

namespace {

LabelScheme scheme_arg(const std::string& s) {
    const auto scheme = parse_scheme(s);
    if (!scheme) throw UsageError("unknown label scheme '" + s + "' (expected binary or ternary)");
    return *scheme;
}

std::uint64_t joined_key(const std::vector<std::string>& tokens) {
    PreprocessedText p;
    p.tokens = tokens;
    return fnv1a64(p.joined());
}

py::tuple load_embeddings(const std::filesystem::path& path) {
    const EmbeddingTable table = load_embedding_table(path);
    const auto n = static_cast<py::ssize_t>(table.keys.size());
    const auto dim = static_cast<py::ssize_t>(table.dim);
    py::array_t<std::uint64_t> keys(n);
    std::memcpy(keys.mutable_data(), table.keys.data(), table.keys.size() * sizeof(std::uint64_t));
    py::array_t<float> vectors({n, dim});
    std::memcpy(vectors.mutable_data(), table.values.data(), table.values.size() * sizeof(float));
    return py::make_tuple(keys, vectors);
}

void save_embeddings(const std::filesystem::path& path,
                     py::array_t<std::uint64_t, py::array::c_style | py::array::forcecast> keys,
                     py::array_t<float, py::array::c_style | py::array::forcecast> vectors) {
    if (vectors.ndim() != 2 || keys.ndim() != 1 || vectors.shape(0) != keys.shape(0)) {
        throw ShapeError("expected keys of shape (n,) and vectors of shape (n, dim)");
    }
    EmbeddingTable table;
    table.dim = static_cast<std::uint32_t>(vectors.shape(1));
    table.keys.assign(keys.data(), keys.data() + keys.size());
    table.values.assign(vectors.data(), vectors.data() + vectors.size());
    save_embedding_table(path, table);
}

py::dict load_candidates(const std::filesystem::path& path) {
    const CandidateTable table = load_candidate_table(path);
    py::dict out;
    for (const auto& [key, subs] : table.entries()) {
        out[py::make_tuple(key.first, key.second)] = subs;
    }
    return out;
}

void save_candidates(const std::filesystem::path& path,
                     const std::map<std::pair<std::uint64_t, std::uint16_t>, std::vector<std::string>>& entries) {
    CandidateTable table;
    for (const auto& [key, subs] : entries) table.add(key.first, key.second, subs);
    save_candidate_table(path, table);
}

py::dict load_threads_summary(const std::filesystem::path& path) {
    ThreadsHeader header;
    const Dataset d = load_threads(path, &header);
    py::list threads;
    for (const auto& [event, list] : d.events) {
        for (const Thread& t : list) {
            py::dict row;
            row["thread_id"] = t.thread_id;
            row["event"] = t.event;
            row["label"] = std::string(to_string(t.label.value));
            row["augmented"] = t.provenance.is_augmented();
            row["parent_thread_id"] = t.provenance.parent_thread_id;
            std::vector<std::string> texts;
            for (const Tweet& tw : t.tweets) texts.push_back(tw.text);
            row["texts"] = texts;
            threads.append(row);
        }
    }
    py::dict out;
    out["scheme"] = std::string(to_string(header.scheme));
    out["seed"] = header.seed;
    out["threads"] = threads;
    return out;
}

py::dict metrics_dict(const std::vector<std::size_t>& preds, const std::vector<std::size_t>& truth,
                      const std::string& scheme) {
    const auto m = eval::compute_metrics(preds, truth, scheme_arg(scheme));
    py::dict out;
    out["accuracy"] = m.accuracy;
    out["micro_f1"] = m.micro_f1;
    out["macro_f1"] = m.macro_f1;
    out["confusion"] = m.confusion;
    py::list per_class;
    for (const auto& c : m.per_class) {
        py::dict d;
        d["precision"] = c.precision;
        d["recall"] = c.recall;
        d["f1"] = c.f1;
        d["support"] = c.support;
        per_class.append(d);
    }
    out["per_class"] = per_class;
    return out;
}

py::tuple run_cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code = 0;
    {
        py::gil_scoped_release release;
        code = cli::run(args, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_threadforge, m) {
    m.doc() = "Rumour detection on reply threads: preprocessing, interchange files and the staged pipeline";

    py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);

    py::class_<PreprocessedText>(m, "PreprocessedText")
        .def_readonly("tokens", &PreprocessedText::tokens)
        .def_readonly("keyword_mask", &PreprocessedText::keyword_mask)
        .def("joined", &PreprocessedText::joined)
        .def("keyword_count", &PreprocessedText::keyword_count)
        .def("__repr__", [](const PreprocessedText& p) { return "PreprocessedText('" + p.joined() + "')"; });

    m.def("normalize_tweet", py::overload_cast<std::string_view>(&normalize_tweet), py::arg("text"),
          "Tokens with placeholders for URLs and mentions and emoji aliases; ASCII only.");
    m.def("text_key", [](const std::string& text) { return text_key(normalize_tweet(text)); }, py::arg("text"),
          "Join key of a raw tweet text in embedding and candidate tables.");
    m.def("text_key_of_tokens", &joined_key, py::arg("tokens"), "Join key of already normalized tokens.");
    m.def("is_keyword", &is_keyword, py::arg("token"));

    m.def("load_embedding_table", &load_embeddings, py::arg("path"), "Returns (keys uint64[n], vectors float32[n, dim]).");
    m.def("save_embedding_table", &save_embeddings, py::arg("path"), py::arg("keys"), py::arg("vectors"));
    m.def("load_candidate_table", &load_candidates, py::arg("path"),
          "Returns {(text_key, token_index): [substitutes]}.");
    m.def("save_candidate_table", &save_candidates, py::arg("path"), py::arg("entries"));
    m.def("load_threads", &load_threads_summary, py::arg("path"),
          "Header fields plus one dict per thread with its tweet texts.");

    m.def(
        "influence_weights",
        [](const std::vector<std::string>& texts) {
            std::vector<PreprocessedText> p;
            for (const auto& t : texts) p.push_back(normalize_tweet(t));
            const auto dist = influence_weights(p);
            return py::make_tuple(dist.weights, dist.normalized);
        },
        py::arg("texts"), "Returns (weights, selection probabilities) over the tweets of a thread.");
    m.def(
        "plan_oversample",
        [](std::size_t n_label, std::size_t n, int fold_cap) {
            const auto plan = plan_oversample(n_label, n, fold_cap);
            return py::make_tuple(plan.n_fold, plan.n_random, plan.deficit);
        },
        py::arg("n_label"), py::arg("n"), py::arg("fold_cap") = 3, "Returns (n_fold, n_random, deficit).");
    m.def("compute_metrics", &metrics_dict, py::arg("preds"), py::arg("truth"), py::arg("scheme") = "binary");
    m.def("run", &run_cli, py::arg("args"), "Runs one command line; returns (exit_code, stdout, stderr).");
}
