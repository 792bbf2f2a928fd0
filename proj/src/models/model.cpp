#include "threadforge/models/model.hpp"

#include <algorithm>

#include "threadforge/common/error.hpp"
#include "threadforge/common/hash.hpp"
#include "threadforge/common/random.hpp"
#include "threadforge/nn/ops.hpp"

namespace threadforge::models {

using nn::Matrix;
using nn::Var;

std::string to_string(ModelKind kind) { return kind == ModelKind::gcn ? "gcn" : "gat"; }

ModelKind parse_model_kind(const std::string& text) {
    if (text == "gcn") return ModelKind::gcn;
    if (text == "gat") return ModelKind::gat;
    throw UsageError("unknown model kind '" + text + "' (expected gcn or gat)");
}

std::string to_string(AdjacencyMode mode) { return mode == AdjacencyMode::directed ? "directed" : "symmetrized"; }

AdjacencyMode parse_adjacency_mode(const std::string& text) {
    if (text == "directed") return AdjacencyMode::directed;
    if (text == "symmetrized") return AdjacencyMode::symmetrized;
    throw UsageError("unknown adjacency mode '" + text + "' (expected directed or symmetrized)");
}

void Architecture::validate() const {
    if (input_dim == 0) throw UsageError("architecture: input_dim must be positive");
    if (hidden_dim == 0) throw UsageError("architecture: hidden_dim must be positive");
    if (layers == 0) throw UsageError("architecture: layers must be positive");
    if (kind == ModelKind::gat) {
        if (heads == 0) throw UsageError("architecture: heads must be positive");
        if (layers > 1 && hidden_dim % heads != 0) {
            throw UsageError("architecture: hidden_dim " + std::to_string(hidden_dim) + " is not divisible by " +
                             std::to_string(heads) + " heads");
        }
    }
    if (classifier_head && classes < 2) throw UsageError("architecture: need at least 2 classes");
    for (std::size_t h : mlp_hidden)
        if (h == 0) throw UsageError("architecture: mlp hidden sizes must be positive");
    if (!(attention_slope >= 0.0)) throw UsageError("architecture: attention slope must be non-negative");
}

namespace {

struct Shape {
    std::string name;
    std::size_t rows;
    std::size_t cols;
};

std::size_t gat_head_dim(const Architecture& arch, std::size_t layer) {
    return layer + 1 < arch.layers ? arch.hidden_dim / arch.heads : arch.hidden_dim;
}

std::vector<std::size_t> mlp_dims(const Architecture& arch) {
    if (!arch.classifier_head) return {};
    std::vector<std::size_t> dims{arch.hidden_dim};
    dims.insert(dims.end(), arch.mlp_hidden.begin(), arch.mlp_hidden.end());
    dims.push_back(arch.classes);
    return dims;
}

std::vector<Shape> parameter_shapes(const Architecture& arch) {
    std::vector<Shape> shapes;
    for (std::size_t l = 0; l < arch.layers; ++l) {
        const std::size_t in = l == 0 ? arch.input_dim : arch.hidden_dim;
        const std::string prefix = to_string(arch.kind) + ".layer" + std::to_string(l);
        if (arch.kind == ModelKind::gcn) {
            shapes.push_back({prefix + ".weight", in, arch.hidden_dim});
        } else {
            const std::size_t out = gat_head_dim(arch, l);
            for (std::size_t k = 0; k < arch.heads; ++k) {
                const std::string head = prefix + ".head" + std::to_string(k);
                shapes.push_back({head + ".projection", in, out});
                shapes.push_back({head + ".attention", 2 * out, 1});
            }
        }
    }
    const auto dims = mlp_dims(arch);
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
        const std::string prefix = "mlp.layer" + std::to_string(i);
        shapes.push_back({prefix + ".weight", dims[i], dims[i + 1]});
        shapes.push_back({prefix + ".bias", 1, dims[i + 1]});
    }
    return shapes;
}

std::vector<const Matrix*> ordered_values(const Model& model) {
    std::vector<const Matrix*> out;
    const Mlp* mlp = nullptr;
    if (const auto* gcn = std::get_if<GcnParams>(&model.params)) {
        for (const auto& w : gcn->weights) out.push_back(&w);
        mlp = &gcn->mlp;
    } else {
        const auto& gat = std::get<GatParams>(model.params);
        for (const auto& layer : gat.layers) {
            for (const auto& head : layer) {
                out.push_back(&head.projection);
                out.push_back(&head.attention);
            }
        }
        mlp = &gat.mlp;
    }
    for (const auto& d : mlp->layers) {
        out.push_back(&d.weight);
        out.push_back(&d.bias);
    }
    return out;
}

Model empty_model(const Architecture& arch) {
    Model model;
    model.arch = arch;
    Mlp mlp;
    mlp.layers.resize(mlp_dims(arch).empty() ? 0 : mlp_dims(arch).size() - 1);
    if (arch.kind == ModelKind::gcn) {
        GcnParams p;
        p.weights.resize(arch.layers);
        p.mlp = std::move(mlp);
        model.params = std::move(p);
    } else {
        GatParams p;
        p.layers.assign(arch.layers, std::vector<GatHead>(arch.heads));
        p.mlp = std::move(mlp);
        model.params = std::move(p);
    }
    return model;
}

Var apply_activation(Var x, Activation act) { return act == Activation::relu ? nn::relu(x) : x; }

}  // namespace

std::vector<nn::ParamRef> Model::parameters() {
    const auto shapes = parameter_shapes(arch);
    const auto values = ordered_values(*this);
    std::vector<nn::ParamRef> refs;
    refs.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) refs.push_back({shapes[i].name, const_cast<Matrix*>(values[i])});
    return refs;
}

std::vector<nn::NamedTensor> Model::to_tensors() const {
    const auto shapes = parameter_shapes(arch);
    const auto values = ordered_values(*this);
    std::vector<nn::NamedTensor> out;
    out.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out.push_back({shapes[i].name, *values[i]});
    return out;
}

Model Model::from_tensors(const Architecture& arch, const std::vector<nn::NamedTensor>& tensors) {
    arch.validate();
    Model model = empty_model(arch);
    const auto shapes = parameter_shapes(arch);
    if (tensors.size() != shapes.size()) {
        throw DataError("checkpoint has " + std::to_string(tensors.size()) + " tensors, architecture expects " +
                        std::to_string(shapes.size()));
    }
    auto refs = model.parameters();
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        const auto& t = tensors[i];
        if (t.name != shapes[i].name || t.value.rows() != shapes[i].rows || t.value.cols() != shapes[i].cols) {
            throw DataError("checkpoint tensor " + std::to_string(i) + " is '" + t.name + "' " +
                            t.value.shape_string() + ", expected '" + shapes[i].name + "' " +
                            std::to_string(shapes[i].rows) + "x" + std::to_string(shapes[i].cols));
        }
        *refs[i].value = t.value;
    }
    return model;
}

Model init_model(const Architecture& arch, std::uint64_t seed) {
    arch.validate();
    Model model = empty_model(arch);
    const auto shapes = parameter_shapes(arch);
    auto refs = model.parameters();
    Rng rng(combine_seed(seed, "init"));
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        const bool bias = shapes[i].name.ends_with(".bias");
        *refs[i].value = bias ? Matrix(shapes[i].rows, shapes[i].cols)
                              : nn::glorot_uniform(shapes[i].rows, shapes[i].cols, rng);
    }
    return model;
}

GraphBatch make_batch(std::span<const GraphInput> inputs, const Architecture& arch) {
    if (inputs.empty()) throw UsageError("make_batch: no graphs");
    GraphBatch batch;
    std::size_t total = 0;
    const std::size_t width = inputs[0].features->cols();
    batch.offsets.push_back(0);
    for (const auto& in : inputs) {
        if (in.features->cols() != width) {
            throw ShapeError("make_batch: feature widths differ (" + std::to_string(width) + " vs " +
                             std::to_string(in.features->cols()) + ")");
        }
        if (in.features->rows() != in.adjacency->n || in.adjacency->n == 0) {
            throw ShapeError("make_batch: features " + in.features->shape_string() + " for a " +
                             std::to_string(in.adjacency->n) + "-node graph");
        }
        total += in.adjacency->n;
        batch.offsets.push_back(total);
    }
    batch.features = Matrix(total, width);
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t g = 0; g < inputs.size(); ++g) {
        const std::size_t base = batch.offsets[g];
        const Matrix& f = *inputs[g].features;
        std::copy(f.data().begin(), f.data().end(), batch.features.data().begin() + base * width);
        for (auto [p, c] : inputs[g].adjacency->edges) edges.emplace_back(base + p, base + c);
    }
    if (arch.kind == ModelKind::gcn) {
        batch.norm_adj = normalized_adjacency(total, edges, arch.adjacency);
    } else {
        batch.neighbors = attention_neighborhoods(total, edges);
    }
    return batch;
}

Var forward(nn::Tape& tape, const Model& model, const GraphBatch& batch, std::vector<Var>* param_vars,
            AttentionTrace* trace) {
    const Architecture& arch = model.arch;
    if (batch.features.cols() != arch.input_dim) {
        throw ShapeError("forward: features " + batch.features.shape_string() + " vs input_dim " +
                         std::to_string(arch.input_dim));
    }
    const auto tensors = model.to_tensors();
    std::vector<Var> params;
    params.reserve(tensors.size());
    for (const auto& t : tensors) params.push_back(tape.parameter(t.value, t.name));
    if (param_vars) *param_vars = params;

    std::size_t next = 0;
    Var h = tape.constant(batch.features);
    if (arch.kind == ModelKind::gcn) {
        for (std::size_t l = 0; l < arch.layers; ++l) {
            h = apply_activation(spmm(batch.norm_adj, nn::matmul(h, params[next++])), arch.activation);
        }
    } else {
        if (trace) {
            trace->neighbors = batch.neighbors;
            trace->alpha.assign(arch.layers, {});
        }
        for (std::size_t l = 0; l < arch.layers; ++l) {
            const bool last = l + 1 == arch.layers;
            std::vector<Var> heads;
            for (std::size_t k = 0; k < arch.heads; ++k) {
                Var w = params[next++];
                Var a = params[next++];
                Var z = nn::matmul(h, w);
                Var e = nn::leaky_relu(attention_logits(z, a, batch.neighbors), arch.attention_slope);
                Var alpha = neighborhood_softmax(e, batch.neighbors);
                if (trace) trace->alpha[l].push_back(alpha.value().data());
                Var out = neighborhood_aggregate(alpha, z, batch.neighbors);
                heads.push_back(last ? out : apply_activation(out, arch.activation));
            }
            if (last) {
                Var total = heads[0];
                for (std::size_t k = 1; k < heads.size(); ++k) total = nn::add(total, heads[k]);
                h = apply_activation(nn::scale(total, 1.0 / static_cast<double>(heads.size())), arch.activation);
            } else {
                h = nn::concat_cols(heads);
            }
        }
    }

    Var x = nn::segment_mean(h, batch.offsets);
    const std::size_t mlp_layers = arch.classifier_head ? arch.mlp_hidden.size() + 1 : 0;
    for (std::size_t i = 0; i < mlp_layers; ++i) {
        Var w = params[next++];
        Var b = params[next++];
        x = nn::add_bias(nn::matmul(x, w), b);
        if (i + 1 < mlp_layers) x = nn::relu(x);
    }
    return x;
}

Matrix predict_logits(const Model& model, const GraphBatch& batch) {
    nn::Tape tape;
    return forward(tape, model, batch).value();
}

Matrix normalize_adjacency(const AdjacencyStructure& adjacency, AdjacencyMode mode) {
    return normalized_adjacency(adjacency.n, adjacency.edges, mode).to_dense();
}

Matrix gcn_forward(const Matrix& features, const Matrix& norm_adj, const Model& model) {
    if (model.arch.kind != ModelKind::gcn) throw UsageError("gcn_forward called with a " + to_string(model.arch.kind) + " model");
    if (norm_adj.rows() != norm_adj.cols() || norm_adj.rows() != features.rows() || features.rows() == 0) {
        throw ShapeError("gcn_forward: adjacency " + norm_adj.shape_string() + " vs features " + features.shape_string());
    }
    GraphBatch batch;
    batch.features = features;
    batch.norm_adj = SparseMatrix::from_dense(norm_adj);
    batch.offsets = {0, features.rows()};
    return predict_logits(model, batch);
}

Matrix gat_forward(const Matrix& features, const AdjacencyStructure& adjacency, const Model& model,
                   AttentionTrace* trace) {
    if (model.arch.kind != ModelKind::gat) throw UsageError("gat_forward called with a " + to_string(model.arch.kind) + " model");
    const GraphInput in{&features, &adjacency};
    const GraphBatch batch = make_batch(std::span<const GraphInput>(&in, 1), model.arch);
    nn::Tape tape;
    return forward(tape, model, batch, nullptr, trace).value();
}

std::vector<double> pool_graph(const Matrix& h) {
    if (h.rows() == 0) throw ShapeError("pool_graph: empty node matrix");
    std::vector<double> out(h.cols(), 0.0);
    for (std::size_t r = 0; r < h.rows(); ++r)
        for (std::size_t c = 0; c < h.cols(); ++c) out[c] += h(r, c);
    for (double& v : out) v /= static_cast<double>(h.rows());
    return out;
}

}  // namespace threadforge::models
