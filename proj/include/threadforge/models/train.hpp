#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "threadforge/data/graph.hpp"
#include "threadforge/data/types.hpp"
#include "threadforge/features/features.hpp"
#include "threadforge/models/model.hpp"

namespace threadforge::models {

struct TrainConfig {
    double lr = 5e-3;
    double weight_decay = 1e-3;
    std::size_t batch_size = 128;
    std::size_t epochs = 100;
    std::size_t hidden_dim = 64;
    std::size_t layers = 2;
    std::size_t heads = 4;
    std::size_t mlp_hidden = 32;  // 0: linear output layer only
    AdjacencyMode adjacency = AdjacencyMode::directed;
    std::uint64_t seed = 0;

    void validate() const;
    Architecture architecture(ModelKind kind, std::size_t input_dim, LabelScheme scheme) const;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double mean_loss = 0.0;
    double train_accuracy = 0.0;
};

struct TrainResult {
    Model model;
    std::vector<EpochRecord> history;
};

// A thread turned into model input.
struct PreparedThread {
    std::string thread_id;
    nn::Matrix features;
    AdjacencyStructure adjacency;
    std::size_t label = 0;
};

std::vector<PreparedThread> prepare_threads(std::span<const Thread* const> threads, const EmbeddingProvider& provider,
                                            LabelScheme scheme, std::size_t workers = 1);

TrainResult train_prepared(ModelKind kind, std::span<const PreparedThread> threads, LabelScheme scheme,
                           const TrainConfig& config);
TrainResult train(ModelKind kind, std::span<const Thread* const> threads, const EmbeddingProvider& provider,
                  LabelScheme scheme, const TrainConfig& config, std::size_t workers = 1);

// Predicted class per thread; threads are batched in chunks evaluated in parallel.
std::vector<std::size_t> predict(const Model& model, std::span<const PreparedThread> threads,
                                 std::size_t batch_size = 128, std::size_t workers = 1);

// Checkpoint plus a JSON sidecar (<path>.json) holding the architecture and
// the hash of the training configuration.
void save_model(const std::filesystem::path& path, const Model& model, const std::string& config_hash);
Model load_model(const std::filesystem::path& path);

}  // namespace threadforge::models
