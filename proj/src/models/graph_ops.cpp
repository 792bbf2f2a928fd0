#include "threadforge/models/graph_ops.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "threadforge/common/error.hpp"

namespace threadforge::models {

using nn::BackwardArgs;
using nn::Matrix;
using nn::Var;

Matrix SparseMatrix::to_dense() const {
    Matrix d(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t k = row_offsets[r]; k < row_offsets[r + 1]; ++k) d(r, col_index[k]) += values[k];
    return d;
}

SparseMatrix SparseMatrix::from_dense(const Matrix& dense) {
    SparseMatrix s;
    s.rows = dense.rows();
    s.cols = dense.cols();
    s.row_offsets.push_back(0);
    for (std::size_t r = 0; r < dense.rows(); ++r) {
        for (std::size_t c = 0; c < dense.cols(); ++c) {
            if (dense(r, c) != 0.0) {
                s.col_index.push_back(c);
                s.values.push_back(dense(r, c));
            }
        }
        s.row_offsets.push_back(s.col_index.size());
    }
    return s;
}

SparseMatrix normalized_adjacency(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                                  AdjacencyMode mode) {
    std::vector<std::map<std::size_t, double>> rows(n);
    for (std::size_t i = 0; i < n; ++i) rows[i][i] += 1.0;
    for (auto [p, c] : edges) {
        if (p >= n || c >= n) {
            throw ShapeError("edge (" + std::to_string(p) + "," + std::to_string(c) + ") outside a " +
                             std::to_string(n) + "-node graph");
        }
        rows[p][c] += 1.0;
        if (mode == AdjacencyMode::symmetrized) rows[c][p] += 1.0;
    }
    std::vector<double> inv_sqrt_degree(n);
    for (std::size_t i = 0; i < n; ++i) {
        double d = 0.0;
        for (const auto& [_, v] : rows[i]) d += v;
        inv_sqrt_degree[i] = 1.0 / std::sqrt(d);
    }
    SparseMatrix s;
    s.rows = s.cols = n;
    s.row_offsets.reserve(n + 1);
    s.row_offsets.push_back(0);
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& [j, v] : rows[i]) {
            s.col_index.push_back(j);
            s.values.push_back(inv_sqrt_degree[i] * v * inv_sqrt_degree[j]);
        }
        s.row_offsets.push_back(s.col_index.size());
    }
    return s;
}

NeighborList attention_neighborhoods(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
    std::vector<std::vector<std::size_t>> parents(n), children(n);
    for (auto [p, c] : edges) {
        if (p >= n || c >= n) {
            throw ShapeError("edge outside a " + std::to_string(n) + "-node graph");
        }
        parents[c].push_back(p);
        children[p].push_back(c);
    }
    NeighborList nbr;
    nbr.offsets.reserve(n + 1);
    nbr.offsets.push_back(0);
    for (std::size_t i = 0; i < n; ++i) {
        nbr.target.push_back(i);
        nbr.target.insert(nbr.target.end(), parents[i].begin(), parents[i].end());
        nbr.target.insert(nbr.target.end(), children[i].begin(), children[i].end());
        nbr.offsets.push_back(nbr.target.size());
    }
    return nbr;
}

Var spmm(const SparseMatrix& s, Var h) {
    const Matrix& hv = h.value();
    if (s.cols != hv.rows()) {
        throw ShapeError("spmm shape mismatch: " + std::to_string(s.rows) + "x" + std::to_string(s.cols) + " vs " +
                         hv.shape_string());
    }
    Matrix out(s.rows, hv.cols());
    for (std::size_t r = 0; r < s.rows; ++r) {
        auto o = out.row(r);
        for (std::size_t k = s.row_offsets[r]; k < s.row_offsets[r + 1]; ++k) {
            const double v = s.values[k];
            auto src = hv.row(s.col_index[k]);
            for (std::size_t c = 0; c < o.size(); ++c) o[c] += v * src[c];
        }
    }
    return h.tape->record(std::move(out), {h},
                          [&s](const BackwardArgs& g) {
                              Matrix* dh = g.in_grads[0];
                              if (!dh) return;
                              for (std::size_t r = 0; r < s.rows; ++r) {
                                  auto go = g.out_grad.row(r);
                                  for (std::size_t k = s.row_offsets[r]; k < s.row_offsets[r + 1]; ++k) {
                                      auto dst = dh->row(s.col_index[k]);
                                      for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += s.values[k] * go[c];
                                  }
                              }
                          },
                          "spmm");
}

Var attention_logits(Var z, Var a, const NeighborList& nbr) {
    const Matrix& zv = z.value();
    const Matrix& av = a.value();
    const std::size_t f = zv.cols();
    if (av.rows() != 2 * f || av.cols() != 1) {
        throw ShapeError("attention_logits shape mismatch: z " + zv.shape_string() + " vs a " + av.shape_string());
    }
    if (nbr.nodes() != zv.rows()) {
        throw ShapeError("attention_logits: neighbourhoods cover " + std::to_string(nbr.nodes()) + " nodes, z has " +
                         std::to_string(zv.rows()));
    }
    // Per-node halves of the score, then one addition per entry.
    std::vector<double> left(zv.rows(), 0.0), right(zv.rows(), 0.0);
    for (std::size_t i = 0; i < zv.rows(); ++i) {
        for (std::size_t c = 0; c < f; ++c) {
            left[i] += av(c, 0) * zv(i, c);
            right[i] += av(f + c, 0) * zv(i, c);
        }
    }
    Matrix out(nbr.entries(), 1);
    for (std::size_t i = 0; i < nbr.nodes(); ++i)
        for (std::size_t k = nbr.offsets[i]; k < nbr.offsets[i + 1]; ++k) out(k, 0) = left[i] + right[nbr.target[k]];
    return z.tape->record(std::move(out), {z, a},
                          [&nbr, f](const BackwardArgs& g) {
                              const Matrix& zv = *g.in_values[0];
                              const Matrix& av = *g.in_values[1];
                              Matrix* dz = g.in_grads[0];
                              Matrix* da = g.in_grads[1];
                              for (std::size_t i = 0; i < nbr.nodes(); ++i) {
                                  for (std::size_t k = nbr.offsets[i]; k < nbr.offsets[i + 1]; ++k) {
                                      const double gk = g.out_grad(k, 0);
                                      const std::size_t j = nbr.target[k];
                                      for (std::size_t c = 0; c < f; ++c) {
                                          if (dz) {
                                              (*dz)(i, c) += gk * av(c, 0);
                                              (*dz)(j, c) += gk * av(f + c, 0);
                                          }
                                          if (da) {
                                              (*da)(c, 0) += gk * zv(i, c);
                                              (*da)(f + c, 0) += gk * zv(j, c);
                                          }
                                      }
                                  }
                              }
                          },
                          "attention_logits");
}

Var neighborhood_softmax(Var scores, const NeighborList& nbr) {
    const Matrix& sv = scores.value();
    if (sv.rows() != nbr.entries() || sv.cols() != 1) {
        throw ShapeError("neighborhood_softmax: scores " + sv.shape_string() + " for " +
                         std::to_string(nbr.entries()) + " entries");
    }
    Matrix out(sv.rows(), 1);
    for (std::size_t i = 0; i < nbr.nodes(); ++i) {
        const std::size_t lo = nbr.offsets[i], hi = nbr.offsets[i + 1];
        if (hi == lo) continue;
        double mx = sv(lo, 0);
        for (std::size_t k = lo + 1; k < hi; ++k) mx = std::max(mx, sv(k, 0));
        double total = 0.0;
        for (std::size_t k = lo; k < hi; ++k) {
            out(k, 0) = std::exp(sv(k, 0) - mx);
            total += out(k, 0);
        }
        for (std::size_t k = lo; k < hi; ++k) out(k, 0) /= total;
    }
    return scores.tape->record(std::move(out), {scores},
                               [&nbr](const BackwardArgs& g) {
                                   Matrix* d = g.in_grads[0];
                                   if (!d) return;
                                   const Matrix& y = g.out_value;
                                   for (std::size_t i = 0; i < nbr.nodes(); ++i) {
                                       double dot = 0.0;
                                       for (std::size_t k = nbr.offsets[i]; k < nbr.offsets[i + 1]; ++k)
                                           dot += g.out_grad(k, 0) * y(k, 0);
                                       for (std::size_t k = nbr.offsets[i]; k < nbr.offsets[i + 1]; ++k)
                                           (*d)(k, 0) += y(k, 0) * (g.out_grad(k, 0) - dot);
                                   }
                               },
                               "neighborhood_softmax");
}

Var neighborhood_aggregate(Var alpha, Var z, const NeighborList& nbr) {
    const Matrix& av = alpha.value();
    const Matrix& zv = z.value();
    if (av.rows() != nbr.entries() || av.cols() != 1 || zv.rows() != nbr.nodes()) {
        throw ShapeError("neighborhood_aggregate shape mismatch: alpha " + av.shape_string() + " vs z " +
                         zv.shape_string());
    }
    Matrix out(zv.rows(), zv.cols());
    for (std::size_t i = 0; i < nbr.nodes(); ++i) {
        auto o = out.row(i);
        for (std::size_t k = nbr.offsets[i]; k < nbr.offsets[i + 1]; ++k) {
            auto src = zv.row(nbr.target[k]);
            for (std::size_t c = 0; c < o.size(); ++c) o[c] += av(k, 0) * src[c];
        }
    }
    return alpha.tape->record(std::move(out), {alpha, z},
                              [&nbr](const BackwardArgs& g) {
                                  const Matrix& av = *g.in_values[0];
                                  const Matrix& zv = *g.in_values[1];
                                  Matrix* dalpha = g.in_grads[0];
                                  Matrix* dz = g.in_grads[1];
                                  for (std::size_t i = 0; i < nbr.nodes(); ++i) {
                                      auto go = g.out_grad.row(i);
                                      for (std::size_t k = nbr.offsets[i]; k < nbr.offsets[i + 1]; ++k) {
                                          const std::size_t j = nbr.target[k];
                                          if (dalpha) {
                                              double dot = 0.0;
                                              auto zj = zv.row(j);
                                              for (std::size_t c = 0; c < go.size(); ++c) dot += go[c] * zj[c];
                                              (*dalpha)(k, 0) += dot;
                                          }
                                          if (dz) {
                                              auto dst = dz->row(j);
                                              for (std::size_t c = 0; c < go.size(); ++c) dst[c] += av(k, 0) * go[c];
                                          }
                                      }
                                  }
                              },
                              "neighborhood_aggregate");
}

}  // namespace threadforge::models
