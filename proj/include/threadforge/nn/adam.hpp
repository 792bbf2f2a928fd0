#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "threadforge/nn/matrix.hpp"

namespace threadforge::nn {

struct AdamConfig {
    double lr = 5e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;  // decoupled: p <- p * (1 - lr * wd) before the Adam update
};

struct AdamState {
    AdamConfig config;
    std::vector<Matrix> m;
    std::vector<Matrix> v;
    std::uint64_t t = 0;
};

struct ParamRef {
    std::string name;
    Matrix* value = nullptr;
};

// One bias-corrected Adam step. Throws NumericError naming the parameter if any
// gradient entry is not finite; parameters are untouched in that case.
void adam_step(std::span<const ParamRef> params, std::span<const Matrix> grads, AdamState& state);

}  // namespace threadforge::nn
