#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "app.hpp"
#include "fixtures.hpp"
#include "threadforge/data/jsonl.hpp"
#include "threadforge/features/features.hpp"

using namespace threadforge;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int code = 0;
    std::string out;
    std::string err;
};

RunResult run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> table_rows(const fs::path& p) {
    std::istringstream in(slurp(p));
    std::vector<std::string> rows;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#') rows.push_back(line);
    return rows;
}

const std::vector<std::string> kSmallTraining = {"--epochs", "5", "--hidden-dim", "8", "--heads", "2",
                                                 "--mlp-hidden", "4", "--hash-dim", "8", "--threads", "1"};

std::vector<std::string> with(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

}  // namespace

TEST_SUITE("cli") {
    TEST_CASE("usage errors exit 1") {
        CHECK(run({}).code == cli::kExitUsage);
        CHECK(run({"frobnicate"}).code == cli::kExitUsage);
        CHECK(run({"ingest", "--input", "x"}).code == cli::kExitUsage);
        CHECK(run({"eval", "--input", "a", "--output", "b", "--variant", "sideways"}).code == cli::kExitUsage);
        const auto help = run({"--help"});
        CHECK(help.code == cli::kExitOk);
        CHECK(help.out.find("early-eval") != std::string::npos);
        const auto version = run({"--version"});
        CHECK(version.code == cli::kExitOk);
    }

    TEST_CASE("ingest: empty directory and a small archive") {
        const auto dir = testing::temp_dir("cli_ingest");
        fs::create_directories(dir / "empty");
        const auto empty = run({"ingest", "--input", (dir / "empty").string(), "--output", (dir / "x.jsonl").string()});
        CHECK(empty.code == cli::kExitData);
        CHECK(empty.err.find("no events found") != std::string::npos);

        Rng rng(1);
        const auto ev = dir / "archive" / "sydneysiege-all-rnr-threads";
        for (int i = 0; i < 3; ++i) {
            testing::ArchiveThread a{testing::random_thread(rng, 3, "", "sydneysiege",
                                                            testing::binary(LabelValue::rumour), {"a", "b"})};
            testing::write_archive_thread(ev / "rumours", a);
        }
        testing::ArchiveThread nr{testing::random_thread(rng, 2, "", "sydneysiege",
                                                         testing::binary(LabelValue::non_rumour), {"c"})};
        nr.is_rumour = "nonrumour";
        testing::write_archive_thread(ev / "non-rumours", nr);
        const auto out = dir / "threads.jsonl";
        const auto ok = run({"ingest", "--input", (dir / "archive").string(), "--output", out.string(), "--scheme",
                             "binary", "--seed", "4"});
        REQUIRE(ok.code == cli::kExitOk);
        const Dataset d = load_threads(out);
        CHECK(d.thread_count() == 4);
        CHECK(fs::exists(out.string() + ".manifest.json"));

        const auto report = run({"validate", "--input", out.string()});
        CHECK(report.code == cli::kExitOk);
        CHECK(!report.out.empty());
        fs::remove_all(dir);
    }

    TEST_CASE("augment is byte-identical across runs") {
        const auto dir = testing::temp_dir("cli_augment");
        const Dataset d = testing::count_dataset(LabelScheme::binary, {{"a", {6, 2}}, {"b", {1, 4}}}, 2);
        const auto in = dir / "threads.jsonl";
        save_threads(in, d, 0);
        std::vector<std::string> digests;
        for (const char* name : {"one.jsonl", "two.jsonl"}) {
            const auto out = dir / name;
            const auto r = run({"augment", "--input", in.string(), "--output", out.string(), "--variant",
                                "nonrandom", "--seed", "7"});
            REQUIRE(r.code == cli::kExitOk);
            const auto manifest = nlohmann::json::parse(slurp(out.string() + ".manifest.json"));
            CHECK(manifest.at("seed") == 7);
            CHECK(manifest.at("command") == "augment");
            digests.push_back(manifest.at("outputs").at(out.string()).get<std::string>());
        }
        CHECK(slurp(dir / "one.jsonl") == slurp(dir / "two.jsonl"));
        CHECK(digests[0] == digests[1]);
        const Dataset augmented = load_threads(dir / "one.jsonl");
        CHECK(augmented.events.at("a").size() == 12);
        CHECK(augmented.events.at("b").size() == 8);

        const auto other = run({"augment", "--input", in.string(), "--output", (dir / "three.jsonl").string(),
                                "--variant", "nonrandom", "--seed", "8"});
        REQUIRE(other.code == cli::kExitOk);
        CHECK(slurp(dir / "three.jsonl") != slurp(dir / "one.jsonl"));
        fs::remove_all(dir);
    }

    TEST_CASE("seed falls back to the environment") {
        const auto dir = testing::temp_dir("cli_env");
        const auto in = dir / "threads.jsonl";
        save_threads(in, testing::count_dataset(LabelScheme::binary, {{"a", {3, 1}}, {"b", {1, 2}}}, 3), 0);
        ::setenv("THREADFORGE_SEED", "31", 1);
        const auto r = run({"augment", "--input", in.string(), "--output", (dir / "o.jsonl").string(), "--variant",
                            "random"});
        ::unsetenv("THREADFORGE_SEED");
        REQUIRE(r.code == cli::kExitOk);
        CHECK(nlohmann::json::parse(slurp(dir / "o.jsonl.manifest.json")).at("seed") == 31);
        fs::remove_all(dir);
    }

    TEST_CASE("eval on three events writes fold and aggregate rows") {
        const auto dir = testing::temp_dir("cli_eval");
        const auto in = dir / "threads.jsonl";
        save_threads(in, testing::separable_dataset(30, 3, 5), 0);
        const auto out = dir / "results.tsv";
        const auto r = run(with({"eval", "--input", in.string(), "--output", out.string(), "--variant", "none",
                                 "--model", "gcn", "--seed", "3", "--predictions", (dir / "preds.tsv").string()},
                                kSmallTraining));
        REQUIRE(r.code == cli::kExitOk);
        const auto rows = table_rows(out);
        REQUIRE(rows.size() == 1 + 3 + 1);
        CHECK(rows[1].rfind("none\tgcn\tevent0\t", 0) == 0);
        CHECK(rows[4].rfind("none\tgcn\taggregate\t", 0) == 0);
        CHECK(table_rows(dir / "preds.tsv").size() == 1 + 30);

        // Repeated run: identical table and manifest.
        const std::string first = slurp(out);
        const std::string first_manifest = slurp(out.string() + ".manifest.json");
        REQUIRE(run(with({"eval", "--input", in.string(), "--output", out.string(), "--variant", "none", "--model",
                          "gcn", "--seed", "3", "--predictions", (dir / "preds.tsv").string()},
                         kSmallTraining))
                    .code == cli::kExitOk);
        CHECK(slurp(out) == first);
        CHECK(slurp(out.string() + ".manifest.json") == first_manifest);
        fs::remove_all(dir);
    }

    TEST_CASE("missing embeddings exit 2 unless hash fallback is allowed") {
        const auto dir = testing::temp_dir("cli_emb");
        const auto in = dir / "threads.jsonl";
        const Dataset d = testing::separable_dataset(6, 2, 6);
        save_threads(in, d, 0);
        EmbeddingTable table;
        table.dim = 4;
        // Only the first tweet's text is covered.
        table.keys.push_back(text_key(normalize_tweet(d.events.begin()->second.front().tweets.front().text)));
        table.values.assign(4, 0.5f);
        save_embedding_table(dir / "emb.bin", table);

        const std::vector<std::string> base = {"train", "--input", in.string(), "--output",
                                               (dir / "m.ckpt").string(), "--emb", (dir / "emb.bin").string(),
                                               "--epochs", "2", "--hidden-dim", "4", "--heads", "2"};
        const auto missing = run(base);
        CHECK(missing.code == cli::kExitData);
        CHECK(missing.err.find("missing") != std::string::npos);
        CHECK(missing.err.find("--fallback-hash") != std::string::npos);

        const auto fallback = run(with(base, {"--fallback-hash"}));
        REQUIRE(fallback.code == cli::kExitOk);
        CHECK(fs::exists(dir / "m.ckpt"));
        CHECK(fs::exists(dir / "m.ckpt.json"));
        CHECK(table_rows(dir / "m.ckpt.history.tsv").size() == 1 + 2);
        fs::remove_all(dir);
    }

    TEST_CASE("config file with flag override") {
        const auto dir = testing::temp_dir("cli_config");
        const auto in = dir / "threads.jsonl";
        save_threads(in, testing::count_dataset(LabelScheme::binary, {{"a", {4, 1}}, {"b", {2, 2}}}, 4), 0);
        std::ofstream(dir / "run.ini") << "[augment]\ninput=" << in.string() << "\noutput=" << (dir / "a.jsonl").string()
                                       << "\nvariant=random\nseed=5\n";
        const auto from_file = run({"--config", (dir / "run.ini").string(), "augment"});
        REQUIRE(from_file.code == cli::kExitOk);
        CHECK(nlohmann::json::parse(slurp(dir / "a.jsonl.manifest.json")).at("seed") == 5);

        const auto overridden = run({"--config", (dir / "run.ini").string(), "augment", "--seed", "6", "--output",
                                     (dir / "b.jsonl").string()});
        REQUIRE(overridden.code == cli::kExitOk);
        CHECK(nlohmann::json::parse(slurp(dir / "b.jsonl.manifest.json")).at("seed") == 6);
        CHECK(fs::exists(dir / "a.jsonl"));
        fs::remove_all(dir);
    }

    TEST_CASE("early-eval and report") {
        const auto dir = testing::temp_dir("cli_early");
        const auto in = dir / "threads.jsonl";
        save_threads(in, testing::late_signal_dataset(18, 3, 2.0, 7), 0);
        const auto curve = dir / "curve.tsv";
        const auto r = run(with({"early-eval", "--input", in.string(), "--output", curve.string(), "--model", "gat",
                                 "--schedule", "0,1,4,72"},
                                kSmallTraining));
        REQUIRE(r.code == cli::kExitOk);
        CHECK(table_rows(curve).size() == 1 + 4 * 4);
        const auto svg = dir / "curve.svg";
        REQUIRE(run({"report", "--input", curve.string(), "--output", svg.string(), "--title", "late"}).code ==
                cli::kExitOk);
        CHECK(slurp(svg).rfind("<svg", 0) == 0);
        CHECK(run({"early-eval", "--input", in.string(), "--output", curve.string(), "--schedule", "4,1"}).code ==
              cli::kExitUsage);
        CHECK(run({"report", "--input", (dir / "nope.tsv").string(), "--output", svg.string()}).code ==
              cli::kExitData);
        fs::remove_all(dir);
    }
}
