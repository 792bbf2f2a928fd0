#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "threadforge/models/model.hpp"

// Loop-based reference computations that share no code with the library's
// forward passes.
namespace threadforge::testing {

using Dense = std::vector<std::vector<double>>;
using EdgeList = std::vector<std::pair<std::size_t, std::size_t>>;

Dense to_dense(const nn::Matrix& m);
Dense dense_matmul(const Dense& a, const Dense& b);

// D^-1/2 (A + I) D^-1/2 with row-sum degrees.
Dense oracle_normalized_adjacency(std::size_t n, const EdgeList& edges, bool symmetrized);

// Logits of one graph.
std::vector<double> oracle_gcn_logits(const Dense& features, const EdgeList& edges, const models::Model& model);
std::vector<double> oracle_gat_logits(const Dense& features, const EdgeList& edges, const models::Model& model);

// Mean cross-entropy over graphs via the library's forward, for finite differences.
double batch_loss(const models::Model& model, const models::GraphBatch& batch, const std::vector<std::size_t>& labels);

struct GradientCheck {
    double max_rel_error = 0.0;
    std::size_t entries = 0;
};

// Central differences on every parameter entry (h = 1e-5 keeps roundoff,
// about eps * loss / h, well below the tolerance); relative error is
// |analytic - numeric| / max(|analytic|, |numeric|, floor).
GradientCheck check_gradients(models::Model model, const models::GraphBatch& batch,
                              const std::vector<std::size_t>& labels, double h = 1e-5, double floor = 1e-6);

}  // namespace threadforge::testing
