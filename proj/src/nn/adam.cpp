#include "threadforge/nn/adam.hpp"

#include <cmath>

#include "threadforge/common/error.hpp"

namespace threadforge::nn {

void adam_step(std::span<const ParamRef> params, std::span<const Matrix> grads, AdamState& state) {
    if (params.size() != grads.size()) {
        throw ShapeError("adam_step: " + std::to_string(params.size()) + " parameters but " +
                         std::to_string(grads.size()) + " gradients");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        const Matrix& p = *params[i].value;
        if (p.rows() != grads[i].rows() || p.cols() != grads[i].cols()) {
            throw ShapeError("adam_step: parameter '" + params[i].name + "' is " + p.shape_string() +
                             " but its gradient is " + grads[i].shape_string());
        }
        if (!grads[i].all_finite()) {
            throw NumericError("adam_step: non-finite gradient for parameter '" + params[i].name + "'");
        }
    }
    if (state.m.empty()) {
        for (const ParamRef& p : params) {
            state.m.emplace_back(p.value->rows(), p.value->cols());
            state.v.emplace_back(p.value->rows(), p.value->cols());
        }
    } else if (state.m.size() != params.size()) {
        throw ShapeError("adam_step: optimizer state tracks a different parameter count");
    }
    const AdamConfig& c = state.config;
    ++state.t;
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.t));
    const double decay = 1.0 - c.lr * c.weight_decay;
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& p = params[i].value->data();
        const auto& g = grads[i].data();
        auto& m = state.m[i].data();
        auto& v = state.v[i].data();
        if (m.size() != p.size()) {
            throw ShapeError("adam_step: optimizer state shape differs for '" + params[i].name + "'");
        }
        for (std::size_t k = 0; k < p.size(); ++k) {
            m[k] = c.beta1 * m[k] + (1.0 - c.beta1) * g[k];
            v[k] = c.beta2 * v[k] + (1.0 - c.beta2) * g[k] * g[k];
            const double m_hat = m[k] / bc1;
            const double v_hat = v[k] / bc2;
            p[k] = p[k] * decay - c.lr * m_hat / (std::sqrt(v_hat) + c.eps);
        }
    }
}

}  // namespace threadforge::nn
