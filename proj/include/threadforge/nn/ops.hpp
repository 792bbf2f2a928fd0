#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "threadforge/nn/tape.hpp"

// Differentiable primitives. Every op checks shapes and throws ShapeError
// naming both operands.
namespace threadforge::nn {

Var matmul(Var a, Var b);
Var add(Var a, Var b);
// x (n x c) + bias (1 x c) broadcast over rows.
Var add_bias(Var x, Var bias);
Var scale(Var x, double factor);
Var relu(Var x);
Var leaky_relu(Var x, double slope);
Var row_softmax(Var x);
// Mean of the rows: (n x c) -> (1 x c).
Var row_mean(Var x);
// Per-segment row means: rows [offsets[g], offsets[g+1]) -> row g of the output.
Var segment_mean(Var x, std::span<const std::size_t> offsets);
Var concat_cols(std::span<const Var> parts);
// Sum of all entries -> 1 x 1.
Var sum(Var x);
// Mean softmax cross-entropy of logits (n x C) against class indices -> 1 x 1.
Var cross_entropy(Var logits, std::span<const std::size_t> labels);

// Forward-only helpers shared with evaluation code.
std::vector<double> log_softmax(std::span<const double> logits);
std::size_t argmax(std::span<const double> values);

}  // namespace threadforge::nn
