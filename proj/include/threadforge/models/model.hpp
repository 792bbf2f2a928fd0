#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "threadforge/data/graph.hpp"
#include "threadforge/models/graph_ops.hpp"
#include "threadforge/nn/adam.hpp"
#include "threadforge/nn/checkpoint.hpp"
#include "threadforge/nn/tape.hpp"

namespace threadforge::models {

enum class ModelKind { gcn, gat };
enum class Activation { relu, identity };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& text);
std::string to_string(AdjacencyMode mode);
AdjacencyMode parse_adjacency_mode(const std::string& text);

struct Architecture {
    ModelKind kind = ModelKind::gcn;
    std::size_t input_dim = 0;
    std::size_t hidden_dim = 64;
    std::size_t layers = 2;
    std::size_t heads = 4;                       // GAT only
    std::vector<std::size_t> mlp_hidden = {32};  // ReLU layers before the output layer
    bool classifier_head = true;                 // false: logits are the pooled vector
    std::size_t classes = 2;
    Activation activation = Activation::relu;
    AdjacencyMode adjacency = AdjacencyMode::directed;  // GCN only
    double attention_slope = 0.2;

    // Throws UsageError on zero sizes or a hidden width not divisible by the heads.
    void validate() const;
    std::size_t output_dim() const noexcept { return classifier_head ? classes : hidden_dim; }
};

struct Dense {
    nn::Matrix weight;  // in x out
    nn::Matrix bias;    // 1 x out
};

struct Mlp {
    std::vector<Dense> layers;
};

struct GcnParams {
    std::vector<nn::Matrix> weights;
    Mlp mlp;
};

struct GatHead {
    nn::Matrix projection;  // in x out
    nn::Matrix attention;   // 2*out x 1
};

struct GatParams {
    std::vector<std::vector<GatHead>> layers;  // [layer][head]
    Mlp mlp;
};

struct Model {
    Architecture arch;
    std::variant<GcnParams, GatParams> params;

    // Stable order shared by the optimizer, gradients and checkpoints.
    std::vector<nn::ParamRef> parameters();
    std::vector<nn::NamedTensor> to_tensors() const;
    // Throws DataError if names or shapes differ from what `arch` implies.
    static Model from_tensors(const Architecture& arch, const std::vector<nn::NamedTensor>& tensors);
};

// Glorot-uniform weights, zero biases.
Model init_model(const Architecture& arch, std::uint64_t seed);

// Disjoint union of several threads; node offsets delimit each graph.
struct GraphBatch {
    nn::Matrix features;
    SparseMatrix norm_adj;   // GCN
    NeighborList neighbors;  // GAT
    std::vector<std::size_t> offsets;
    std::size_t graphs() const noexcept { return offsets.empty() ? 0 : offsets.size() - 1; }
};

struct GraphInput {
    const nn::Matrix* features = nullptr;
    const AdjacencyStructure* adjacency = nullptr;
};

GraphBatch make_batch(std::span<const GraphInput> inputs, const Architecture& arch);

// Attention coefficients captured during a GAT forward pass: [layer][head],
// one entry per neighbourhood entry of `neighbors`.
struct AttentionTrace {
    NeighborList neighbors;
    std::vector<std::vector<std::vector<double>>> alpha;
};

// Records the forward pass; `param_vars` receives the parameter leaves in
// Model::parameters() order. Returns logits (graphs x output_dim).
nn::Var forward(nn::Tape& tape, const Model& model, const GraphBatch& batch, std::vector<nn::Var>* param_vars = nullptr,
                AttentionTrace* trace = nullptr);

nn::Matrix predict_logits(const Model& model, const GraphBatch& batch);

// Single-graph entry points.
nn::Matrix normalize_adjacency(const AdjacencyStructure& adjacency, AdjacencyMode mode = AdjacencyMode::directed);
nn::Matrix gcn_forward(const nn::Matrix& features, const nn::Matrix& norm_adj, const Model& model);
nn::Matrix gat_forward(const nn::Matrix& features, const AdjacencyStructure& adjacency, const Model& model,
                       AttentionTrace* trace = nullptr);
std::vector<double> pool_graph(const nn::Matrix& h);

}  // namespace threadforge::models
