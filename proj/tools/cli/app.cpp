#include "app.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "threadforge/common/error.hpp"
#include "threadforge/common/hash.hpp"
#include "threadforge/common/parallel.hpp"
#include "threadforge/data/ingest.hpp"
#include "threadforge/data/jsonl.hpp"
#include "threadforge/data/validate.hpp"
#include "threadforge/eval/experiment.hpp"
#include "threadforge/eval/report.hpp"
#include "threadforge/features/features.hpp"
#include "threadforge/models/train.hpp"
#include "threadforge/mos/candidates.hpp"
#include "threadforge/mos/mos.hpp"

namespace threadforge::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Common {
    std::uint64_t seed = 0;
    std::size_t threads = 0;  // 0: hardware concurrency
    std::size_t workers() const { return threads == 0 ? default_thread_count() : threads; }
};

struct EmbeddingOptions {
    std::string table;
    bool fallback_hash = false;
    std::size_t hash_dim = kDefaultHashDim;
};

struct StrategyOptions {
    double p_aug = 0.2;
    int fold_cap = 3;
    double token_fraction = 0.15;
    bool no_vocabulary_fallback = false;
    std::string candidates;
};

struct TrainOptions {
    models::TrainConfig config;
    std::string adjacency = "directed";
};

std::string hex64(std::uint64_t v) {
    std::ostringstream s;
    s << std::hex;
    s.width(16);
    s.fill('0');
    s << v;
    return s.str();
}

std::string file_digest(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    return hex64(h);
}

void require_file(const std::string& path, const char* what) {
    if (!fs::exists(path)) throw DataError(std::string(what) + " not found: " + path);
}

// Manifest next to the primary output: config hash, seed, input and output
// digests, tool version. Contains nothing time-dependent.
void write_manifest(const fs::path& primary, const std::string& command, const CLI::App& sub, const Common& common,
                    const std::vector<std::string>& inputs, const std::vector<fs::path>& outputs) {
    const std::string config = sub.config_to_str(true, false);
    nlohmann::ordered_json j;
    j["tool"] = "threadforge";
    j["version"] = kVersion;
    j["command"] = command;
    j["seed"] = common.seed;
    j["config_hash"] = hex64(fnv1a64(config));
    j["config"] = config;
    auto& in = j["inputs"] = nlohmann::ordered_json::object();
    for (const auto& p : inputs)
        if (!p.empty()) in[p] = file_digest(p);
    auto& out = j["outputs"] = nlohmann::ordered_json::object();
    for (const auto& p : outputs) out[p.string()] = file_digest(p);
    fs::path path = primary;
    path += ".manifest.json";
    std::ofstream f(path);
    f << j.dump(2) << '\n';
    if (!f) throw DataError("cannot write " + path.string());
}

std::ofstream open_output(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    return out;
}

void add_common(CLI::App* sub, Common& common) {
    sub->add_option("--seed", common.seed, "Random seed")->envname("THREADFORGE_SEED");
    sub->add_option("--threads", common.threads, "Worker threads (0 = available cores)");
}

void add_embedding(CLI::App* sub, EmbeddingOptions& o) {
    sub->add_option("--emb", o.table, "EMB1 embedding table (default: hash embeddings)");
    sub->add_flag("--fallback-hash", o.fallback_hash, "Hash-embed texts missing from the table");
    sub->add_option("--hash-dim", o.hash_dim, "Hash embedding width")->check(CLI::PositiveNumber);
}

void add_strategy(CLI::App* sub, StrategyOptions& o) {
    sub->add_option("--p-aug", o.p_aug, "Fraction of tweets rewritten per copy")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--fold-cap", o.fold_cap, "Cap on whole-set augmentation rounds")->check(CLI::PositiveNumber);
    sub->add_option("--token-fraction", o.token_fraction, "Fraction of tokens substituted per tweet")
        ->check(CLI::Range(0.0, 1.0));
    sub->add_flag("--no-vocabulary-fallback", o.no_vocabulary_fallback,
                  "Leave tweets without candidates unchanged");
    sub->add_option("--candidates", o.candidates, "CND1 substitution candidate table");
}

void add_training(CLI::App* sub, TrainOptions& o) {
    auto& c = o.config;
    sub->add_option("--epochs", c.epochs, "Training epochs");
    sub->add_option("--lr", c.lr, "Adam learning rate");
    sub->add_option("--weight-decay", c.weight_decay, "Decoupled weight decay");
    sub->add_option("--batch-size", c.batch_size, "Threads per gradient step")->check(CLI::PositiveNumber);
    sub->add_option("--hidden-dim", c.hidden_dim, "Hidden width")->check(CLI::PositiveNumber);
    sub->add_option("--layers", c.layers, "Graph layers")->check(CLI::PositiveNumber);
    sub->add_option("--heads", c.heads, "GAT attention heads")->check(CLI::PositiveNumber);
    sub->add_option("--mlp-hidden", c.mlp_hidden, "Classifier hidden width (0 = linear)");
    sub->add_option("--adjacency", o.adjacency, "GCN adjacency: directed or symmetrized")
        ->check(CLI::IsMember({"directed", "symmetrized"}));
}

AugmentationStrategy make_strategy(const StrategyOptions& o, std::uint64_t seed) {
    AugmentationStrategy s;
    s.p_aug = o.p_aug;
    s.fold_cap = o.fold_cap;
    s.token_fraction = o.token_fraction;
    s.vocabulary_fallback = !o.no_vocabulary_fallback;
    s.seed = seed;
    s.validate();
    return s;
}

CandidateTable load_candidates(const StrategyOptions& o) {
    if (o.candidates.empty()) return {};
    require_file(o.candidates, "candidate table");
    return load_candidate_table(o.candidates);
}

models::TrainConfig make_train_config(const TrainOptions& o) {
    models::TrainConfig c = o.config;
    c.adjacency = models::parse_adjacency_mode(o.adjacency);
    c.validate();
    return c;
}

EmbeddingProvider make_provider(const EmbeddingOptions& o) {
    if (o.table.empty()) return EmbeddingProvider::hash(o.hash_dim);
    require_file(o.table, "embedding table");
    return EmbeddingProvider::from_table(load_embedding_table(o.table), o.fallback_hash);
}

// Fails with a data error listing how many texts the table cannot embed.
void check_coverage(const EmbeddingProvider& provider, const std::vector<const Dataset*>& datasets) {
    if (provider.kind() != EmbeddingProvider::Kind::file_backed) return;
    std::vector<const Thread*> threads;
    for (const Dataset* d : datasets)
        for (const auto& [_, ts] : d->events)
            for (const auto& t : ts) threads.push_back(&t);
    const auto missing = missing_text_keys(provider, threads);
    if (!missing.empty()) {
        throw DataError("embedding table is missing " + std::to_string(missing.size()) +
                        " tweet texts (first key " + hex64(missing.front()) +
                        "); rerun the exporter or pass --fallback-hash");
    }
}

Dataset load_dataset(const std::string& path, ThreadsHeader* header = nullptr) {
    require_file(path, "threads file");
    return load_threads(path, header);
}

std::vector<models::ModelKind> parse_models(const std::string& text) {
    if (text == "both") return {models::ModelKind::gcn, models::ModelKind::gat};
    return {models::parse_model_kind(text)};
}

std::vector<double> parse_schedule(const std::string& text) {
    if (text.empty()) return eval::default_schedule();
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError("schedule entry '" + item + "' is not a number");
        }
    }
    eval::validate_schedule(out);
    return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Rumour detection on reply threads with multifold oversampling and graph networks", "threadforge"};
    app.set_config("--config", "", "INI config file; [section] per subcommand, flags override it");
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    Common common;
    std::function<void()> action;

    // ingest
    std::string ingest_input, ingest_output, ingest_scheme = "ternary";
    auto* ingest = app.add_subcommand("ingest", "Read a PHEME-layout archive into a threads file");
    ingest->add_option("--input", ingest_input, "Archive root directory")->required();
    ingest->add_option("--output", ingest_output, "Threads file to write")->required();
    ingest->add_option("--scheme", ingest_scheme, "Label scheme: binary or ternary")
        ->check(CLI::IsMember({"binary", "ternary"}));
    add_common(ingest, common);
    ingest->callback([&] {
        action = [&] {
            if (!fs::is_directory(ingest_input)) throw DataError("archive root is not a directory: " + ingest_input);
            const auto result = ingest_pheme(ingest_input, *parse_scheme(ingest_scheme), common.workers());
            for (const auto& s : result.skipped) err << "skipped " << s.path.string() << ": " << s.reason << '\n';
            if (result.dataset.events.empty()) throw DataError("no events found under " + ingest_input);
            auto f = open_output(ingest_output);
            write_threads(f, result.dataset, common.seed);
            f.close();
            err << "ingest: " << result.dataset.events.size() << " events, " << result.dataset.thread_count()
                << " threads, " << result.skipped.size() << " skipped\n";
            write_manifest(ingest_output, "ingest", *ingest, common, {}, {ingest_output});
        };
    });

    // validate
    std::string validate_input, validate_output;
    auto* validate = app.add_subcommand("validate", "Check a threads file and report label counts");
    validate->add_option("--input", validate_input, "Threads file")->required();
    validate->add_option("--output", validate_output, "Write the report here instead of stdout");
    add_common(validate, common);
    int validate_status = kExitOk;
    validate->callback([&] {
        action = [&] {
            const auto report = validate_dataset(load_dataset(validate_input));
            const auto text = format_report(report);
            if (validate_output.empty()) {
                out << text;
            } else {
                auto f = open_output(validate_output);
                f << text;
                f.close();
                write_manifest(validate_output, "validate", *validate, common, {validate_input}, {validate_output});
            }
            if (!report.ok()) validate_status = kExitData;
        };
    });

    // augment
    std::string augment_input, augment_output, augment_variant = "nonrandom";
    StrategyOptions augment_strategy;
    auto* augment = app.add_subcommand("augment", "Balance labels per event with multifold oversampling");
    augment->add_option("--input", augment_input, "Threads file of originals")->required();
    augment->add_option("--output", augment_output, "Threads file with originals and augmentations")->required();
    augment->add_option("--variant", augment_variant, "Tweet selection: random or nonrandom")
        ->check(CLI::IsMember({"random", "nonrandom"}));
    add_strategy(augment, augment_strategy);
    add_common(augment, common);
    augment->callback([&] {
        action = [&] {
            const Dataset d = load_dataset(augment_input);
            auto strategy = make_strategy(augment_strategy, common.seed);
            strategy.kind = augment_variant == "random" ? AugmentationStrategy::Kind::random
                                                        : AugmentationStrategy::Kind::nonrandom;
            OversampleReport report;
            const Dataset augmented =
                oversample_dataset(d, strategy, load_candidates(augment_strategy), common.workers(), &report);
            auto f = open_output(augment_output);
            write_threads(f, augmented, common.seed);
            f.close();
            err << "augment: " << report.stats.threads << " threads generated, " << report.stats.tweets_selected
                << " tweets rewritten, " << report.stats.tweets_unchanged << " without a possible substitution\n";
            write_manifest(augment_output, "augment", *augment, common,
                           {augment_input, augment_strategy.candidates}, {augment_output});
        };
    });

    // train
    std::string train_input, train_output, train_model = "gcn";
    EmbeddingOptions train_emb;
    TrainOptions train_opts;
    auto* train = app.add_subcommand("train", "Train one classifier on a threads file");
    train->add_option("--input", train_input, "Threads file")->required();
    train->add_option("--output", train_output, "Checkpoint to write")->required();
    train->add_option("--model", train_model, "gcn or gat")->check(CLI::IsMember({"gcn", "gat"}));
    add_embedding(train, train_emb);
    add_training(train, train_opts);
    add_common(train, common);
    train->callback([&] {
        action = [&] {
            const Dataset d = load_dataset(train_input);
            const auto provider = make_provider(train_emb);
            check_coverage(provider, {&d});
            auto config = make_train_config(train_opts);
            config.seed = common.seed;
            std::vector<const Thread*> threads;
            for (const auto& [_, ts] : d.events)
                for (const auto& t : ts) threads.push_back(&t);
            const auto result =
                models::train(models::parse_model_kind(train_model), threads, provider, d.scheme, config,
                              common.workers());
            if (fs::path(train_output).has_parent_path()) fs::create_directories(fs::path(train_output).parent_path());
            const std::string config_hash = hex64(fnv1a64(train->config_to_str(true, false)));
            models::save_model(train_output, result.model, config_hash);
            const fs::path history_path = train_output + ".history.tsv";
            auto h = open_output(history_path);
            h << "# threadforge history\n# seed=" << common.seed << "\nepoch\tmean_loss\ttrain_accuracy\n";
            for (const auto& e : result.history) {
                char line[128];
                std::snprintf(line, sizeof line, "%zu\t%.6f\t%.6f\n", e.epoch, e.mean_loss, e.train_accuracy);
                h << line;
            }
            h.close();
            if (!result.history.empty()) {
                err << "train: final loss " << result.history.back().mean_loss << ", training accuracy "
                    << result.history.back().train_accuracy << '\n';
            }
            write_manifest(train_output, "train", *train, common, {train_input, train_emb.table},
                           {train_output, train_output + ".json", history_path});
        };
    });

    // eval and early-eval share their inputs.
    struct EvalOptions {
        std::string input, augmented, output, predictions, variant = "none", model = "gcn", schedule;
        EmbeddingOptions emb;
        StrategyOptions strategy;
        TrainOptions train;
    };
    EvalOptions eval_opts, early_opts;
    auto add_eval = [&](CLI::App* sub, EvalOptions& o) {
        sub->add_option("--input", o.input, "Threads file of originals")->required();
        sub->add_option("--augmented", o.augmented, "Augmented threads file from the augment stage");
        sub->add_option("--output", o.output, "Table to write")->required();
        sub->add_option("--variant", o.variant, "Augmentation: none, random or nonrandom")
            ->check(CLI::IsMember({"none", "random", "nonrandom"}));
        sub->add_option("--model", o.model, "gcn, gat or both")->check(CLI::IsMember({"gcn", "gat", "both"}));
        add_embedding(sub, o.emb);
        add_strategy(sub, o.strategy);
        add_training(sub, o.train);
        add_common(sub, common);
    };
    struct Prepared {
        Dataset dataset;
        Dataset pool;
        EmbeddingProvider provider;
        eval::EvalConfig config;
        eval::Variant variant;
    };
    auto prepare_eval = [&](const EvalOptions& o) {
        Prepared p{load_dataset(o.input), {}, make_provider(o.emb), {}, eval::parse_variant(o.variant)};
        p.config.train = make_train_config(o.train);
        p.config.strategy = make_strategy(o.strategy, common.seed);
        p.config.seed = common.seed;
        p.config.workers = common.workers();
        if (!o.augmented.empty()) {
            if (p.variant == eval::Variant::none) throw UsageError("--augmented needs --variant random or nonrandom");
            p.pool = load_dataset(o.augmented);
        } else {
            p.pool = eval::training_pool(p.dataset, p.variant, p.config.strategy, load_candidates(o.strategy),
                                         p.config.workers);
        }
        check_coverage(p.provider, {&p.dataset, &p.pool});
        return p;
    };

    auto* evaluate = app.add_subcommand("eval", "Leave-one-event-out evaluation");
    add_eval(evaluate, eval_opts);
    evaluate->add_option("--predictions", eval_opts.predictions, "Also write per-thread predictions");
    evaluate->callback([&] {
        action = [&] {
            const auto p = prepare_eval(eval_opts);
            std::vector<eval::LoocvResult> results;
            for (auto kind : parse_models(eval_opts.model)) {
                results.push_back(eval::run_loocv(kind, p.dataset, p.pool, p.variant, p.provider, p.config));
                const auto& a = results.back().aggregate;
                err << "eval " << models::to_string(kind) << ": accuracy " << a.accuracy << ", macro-F1 "
                    << a.macro_f1 << '\n';
            }
            auto f = open_output(eval_opts.output);
            eval::write_results(f, results, common.seed);
            f.close();
            std::vector<fs::path> outputs{eval_opts.output};
            if (!eval_opts.predictions.empty()) {
                auto pf = open_output(eval_opts.predictions);
                eval::write_predictions(pf, results, p.dataset.scheme, common.seed);
                pf.close();
                outputs.emplace_back(eval_opts.predictions);
            }
            write_manifest(eval_opts.output, "eval", *evaluate, common,
                           {eval_opts.input, eval_opts.augmented, eval_opts.emb.table, eval_opts.strategy.candidates},
                           outputs);
        };
    });

    auto* early = app.add_subcommand("early-eval", "Accuracy against time since the source tweet");
    add_eval(early, early_opts);
    early->add_option("--schedule", early_opts.schedule, "Comma-separated delays in hours");
    early->callback([&] {
        action = [&] {
            const auto schedule = parse_schedule(early_opts.schedule);
            const auto p = prepare_eval(early_opts);
            std::vector<eval::EarlyResult> results;
            for (auto kind : parse_models(early_opts.model)) {
                results.push_back(
                    eval::run_early_eval(kind, p.dataset, p.pool, p.variant, schedule, p.provider, p.config));
            }
            auto f = open_output(early_opts.output);
            eval::write_curve(f, results, common.seed);
            f.close();
            write_manifest(early_opts.output, "early-eval", *early, common,
                           {early_opts.input, early_opts.augmented, early_opts.emb.table,
                            early_opts.strategy.candidates},
                           {early_opts.output});
        };
    });

    // report
    std::string report_input, report_output, report_title;
    auto* report = app.add_subcommand("report", "Render an early-detection curve table as SVG");
    report->add_option("--input", report_input, "Curve table from early-eval")->required();
    report->add_option("--output", report_output, "SVG file to write")->required();
    report->add_option("--title", report_title, "Chart title (default: input file name)");
    add_common(report, common);
    report->callback([&] {
        action = [&] {
            require_file(report_input, "curve table");
            std::ifstream in(report_input);
            const auto rows = eval::read_curve(in, report_input);
            const auto title = report_title.empty() ? fs::path(report_input).filename().string() : report_title;
            auto f = open_output(report_output);
            f << eval::render_curve_svg(rows, title);
            f.close();
            write_manifest(report_output, "report", *report, common, {report_input}, {report_output});
        };
    });

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (action) action();
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const nlohmann::json::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
    return validate_status;
}

}  // namespace threadforge::cli
