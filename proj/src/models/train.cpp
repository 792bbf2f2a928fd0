#include "threadforge/models/train.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "threadforge/common/error.hpp"
#include "threadforge/common/hash.hpp"
#include "threadforge/common/parallel.hpp"
#include "threadforge/common/random.hpp"
#include "threadforge/nn/ops.hpp"

namespace threadforge::models {

void TrainConfig::validate() const {
    if (!(lr > 0.0) || !std::isfinite(lr)) throw UsageError("train config: lr must be positive");
    if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) {
        throw UsageError("train config: weight_decay must be non-negative");
    }
    if (batch_size == 0) throw UsageError("train config: batch_size must be positive");
    if (hidden_dim == 0 || layers == 0 || heads == 0) {
        throw UsageError("train config: hidden_dim, layers and heads must be positive");
    }
}

Architecture TrainConfig::architecture(ModelKind kind, std::size_t input_dim, LabelScheme scheme) const {
    Architecture arch;
    arch.kind = kind;
    arch.input_dim = input_dim;
    arch.hidden_dim = hidden_dim;
    arch.layers = layers;
    arch.heads = heads;
    arch.mlp_hidden = mlp_hidden == 0 ? std::vector<std::size_t>{} : std::vector<std::size_t>{mlp_hidden};
    arch.classes = num_classes(scheme);
    arch.adjacency = adjacency;
    return arch;
}

std::vector<PreparedThread> prepare_threads(std::span<const Thread* const> threads, const EmbeddingProvider& provider,
                                            LabelScheme scheme, std::size_t workers) {
    std::vector<PreparedThread> out(threads.size());
    parallel_for(threads.size(), workers, [&](std::size_t i) {
        const Thread& t = *threads[i];
        if (t.label.scheme != scheme || !label_in_scheme(t.label)) {
            throw DataError("thread " + t.thread_id + ": label " + std::string(to_string(t.label.value)) +
                            " is not in the " + std::string(to_string(scheme)) + " scheme");
        }
        out[i].thread_id = t.thread_id;
        out[i].features = assemble_feature_matrix(t, provider).values;
        out[i].adjacency = build_propagation_graph(t);
        out[i].label = class_index(t.label);
    });
    return out;
}

namespace {

GraphBatch batch_of(std::span<const PreparedThread> threads, std::span<const std::size_t> picks,
                    const Architecture& arch) {
    std::vector<GraphInput> inputs;
    inputs.reserve(picks.size());
    for (std::size_t i : picks) inputs.push_back({&threads[i].features, &threads[i].adjacency});
    return make_batch(inputs, arch);
}

}  // namespace

TrainResult train_prepared(ModelKind kind, std::span<const PreparedThread> threads, LabelScheme scheme,
                           const TrainConfig& config) {
    config.validate();
    if (threads.empty()) throw UsageError("train: no training threads");
    const Architecture arch = config.architecture(kind, threads[0].features.cols(), scheme);
    TrainResult result{init_model(arch, config.seed), {}};

    nn::AdamState adam;
    adam.config.lr = config.lr;
    adam.config.weight_decay = config.weight_decay;
    auto params = result.model.parameters();

    std::vector<std::size_t> order(threads.size());
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), 0);
        Rng rng(combine_seed(combine_seed(config.seed, "shuffle"), epoch));
        rng.shuffle(order);

        double loss_total = 0.0;
        std::size_t correct = 0;
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_index) {
            const std::size_t stop = std::min(order.size(), start + config.batch_size);
            const std::span<const std::size_t> picks(order.data() + start, stop - start);
            const GraphBatch batch = batch_of(threads, picks, arch);
            std::vector<std::size_t> labels;
            labels.reserve(picks.size());
            for (std::size_t i : picks) labels.push_back(threads[i].label);

            nn::Tape tape;
            std::vector<nn::ParameterGradient> grads;
            double loss = 0.0;
            try {
                nn::Var logits = forward(tape, result.model, batch);
                nn::Var loss_var = nn::cross_entropy(logits, labels);
                loss = loss_var.value()(0, 0);
                if (!std::isfinite(loss)) throw NumericError("loss is not finite");
                for (std::size_t r = 0; r < picks.size(); ++r)
                    if (nn::argmax(logits.value().row(r)) == labels[r]) ++correct;
                grads = tape.backward(loss_var);
            } catch (const NumericError& e) {
                throw NumericError("training diverged at epoch " + std::to_string(epoch) + ", batch " +
                                   std::to_string(batch_index) + ": " + e.what());
            }
            std::vector<nn::Matrix> grad_values;
            grad_values.reserve(grads.size());
            for (auto& g : grads) grad_values.push_back(std::move(g.grad));
            try {
                nn::adam_step(params, grad_values, adam);
            } catch (const NumericError& e) {
                throw NumericError("training diverged at epoch " + std::to_string(epoch) + ", batch " +
                                   std::to_string(batch_index) + ": " + e.what());
            }
            loss_total += loss * static_cast<double>(picks.size());
        }
        const double n = static_cast<double>(threads.size());
        result.history.push_back({epoch, loss_total / n, static_cast<double>(correct) / n});
    }
    return result;
}

TrainResult train(ModelKind kind, std::span<const Thread* const> threads, const EmbeddingProvider& provider,
                  LabelScheme scheme, const TrainConfig& config, std::size_t workers) {
    const auto prepared = prepare_threads(threads, provider, scheme, workers);
    return train_prepared(kind, prepared, scheme, config);
}

std::vector<std::size_t> predict(const Model& model, std::span<const PreparedThread> threads, std::size_t batch_size,
                                 std::size_t workers) {
    if (batch_size == 0) throw UsageError("predict: batch_size must be positive");
    std::vector<std::size_t> out(threads.size());
    const std::size_t chunks = (threads.size() + batch_size - 1) / batch_size;
    parallel_for(chunks, workers, [&](std::size_t c) {
        const std::size_t start = c * batch_size;
        const std::size_t stop = std::min(threads.size(), start + batch_size);
        std::vector<std::size_t> picks(stop - start);
        std::iota(picks.begin(), picks.end(), start);
        const nn::Matrix logits = predict_logits(model, batch_of(threads, picks, model.arch));
        for (std::size_t r = 0; r < picks.size(); ++r) out[start + r] = nn::argmax(logits.row(r));
    });
    return out;
}

namespace {

nlohmann::ordered_json architecture_json(const Architecture& arch) {
    nlohmann::ordered_json j;
    j["model_kind"] = to_string(arch.kind);
    j["input_dim"] = arch.input_dim;
    j["hidden_dim"] = arch.hidden_dim;
    j["layers"] = arch.layers;
    j["heads"] = arch.heads;
    j["mlp_hidden"] = arch.mlp_hidden;
    j["classifier_head"] = arch.classifier_head;
    j["classes"] = arch.classes;
    j["activation"] = arch.activation == Activation::relu ? "relu" : "identity";
    j["adjacency"] = to_string(arch.adjacency);
    j["attention_slope"] = arch.attention_slope;
    return j;
}

Architecture architecture_from_json(const nlohmann::json& j) {
    Architecture arch;
    arch.kind = parse_model_kind(j.at("model_kind").get<std::string>());
    arch.input_dim = j.at("input_dim").get<std::size_t>();
    arch.hidden_dim = j.at("hidden_dim").get<std::size_t>();
    arch.layers = j.at("layers").get<std::size_t>();
    arch.heads = j.at("heads").get<std::size_t>();
    arch.mlp_hidden = j.at("mlp_hidden").get<std::vector<std::size_t>>();
    arch.classifier_head = j.at("classifier_head").get<bool>();
    arch.classes = j.at("classes").get<std::size_t>();
    const auto act = j.at("activation").get<std::string>();
    if (act != "relu" && act != "identity") throw DataError("unknown activation '" + act + "'");
    arch.activation = act == "relu" ? Activation::relu : Activation::identity;
    arch.adjacency = parse_adjacency_mode(j.at("adjacency").get<std::string>());
    arch.attention_slope = j.at("attention_slope").get<double>();
    return arch;
}

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
    auto p = path;
    p += ".json";
    return p;
}

}  // namespace

void save_model(const std::filesystem::path& path, const Model& model, const std::string& config_hash) {
    nn::save_checkpoint(path, model.to_tensors());
    auto j = architecture_json(model.arch);
    j["config_hash"] = config_hash;
    std::ofstream out(sidecar_path(path));
    if (!out) throw DataError("cannot write " + sidecar_path(path).string());
    out << j.dump(2) << '\n';
    if (!out) throw DataError("failed writing " + sidecar_path(path).string());
}

Model load_model(const std::filesystem::path& path) {
    std::ifstream in(sidecar_path(path));
    if (!in) throw DataError("cannot read model sidecar " + sidecar_path(path).string());
    Architecture arch;
    try {
        arch = architecture_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed model sidecar " + sidecar_path(path).string() + ": " + e.what());
    } catch (const UsageError& e) {
        throw DataError("malformed model sidecar " + sidecar_path(path).string() + ": " + e.what());
    }
    return Model::from_tensors(arch, nn::load_checkpoint(path));
}

}  // namespace threadforge::models
