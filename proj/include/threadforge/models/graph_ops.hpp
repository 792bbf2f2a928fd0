#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "threadforge/data/graph.hpp"
#include "threadforge/nn/tape.hpp"

namespace threadforge::models {

enum class AdjacencyMode { directed, symmetrized };

// Constant CSR matrix.
struct SparseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::size_t> row_offsets;  // rows + 1
    std::vector<std::size_t> col_index;
    std::vector<double> values;

    nn::Matrix to_dense() const;
    static SparseMatrix from_dense(const nn::Matrix& dense);
};

// D^-1/2 (A + I) D^-1/2 with D the row sums of A + I. `edges` are
// (parent, child) pairs; symmetrized mode also adds (child, parent).
SparseMatrix normalized_adjacency(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                                  AdjacencyMode mode);

// Attention neighbourhoods in CSR form: node i attends to itself, its parent
// and its children, in that order.
struct NeighborList {
    std::vector<std::size_t> offsets;  // nodes + 1
    std::vector<std::size_t> target;   // neighbour j of each (i, j) entry
    std::size_t nodes() const noexcept { return offsets.empty() ? 0 : offsets.size() - 1; }
    std::size_t entries() const noexcept { return target.size(); }
};

NeighborList attention_neighborhoods(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges);

// S * H for a constant sparse S.
nn::Var spmm(const SparseMatrix& s, nn::Var h);
// e_(i,j) = a[:F] . z_i + a[F:] . z_j for every neighbourhood entry -> (entries x 1).
nn::Var attention_logits(nn::Var z, nn::Var a, const NeighborList& nbr);
// Softmax of the entries of each node's neighbourhood.
nn::Var neighborhood_softmax(nn::Var scores, const NeighborList& nbr);
// out_i = sum_j alpha_(i,j) z_j.
nn::Var neighborhood_aggregate(nn::Var alpha, nn::Var z, const NeighborList& nbr);

}  // namespace threadforge::models
