#include "threadforge/nn/tape.hpp"

#include "threadforge/common/error.hpp"

namespace threadforge::nn {

const Matrix& Var::value() const { return tape->value(*this); }

Var Tape::constant(Matrix value) {
    if (!value.all_finite()) {
        throw NumericError("non-finite constant recorded on tape");
    }
    nodes_.push_back({std::move(value), {}, {}, false, false, {}});
    return {this, nodes_.size() - 1};
}

Var Tape::parameter(Matrix value, std::string name) {
    if (!value.all_finite()) {
        throw NumericError("non-finite parameter '" + name + "'");
    }
    nodes_.push_back({std::move(value), {}, {}, true, true, std::move(name)});
    return {this, nodes_.size() - 1};
}

Var Tape::record(Matrix value, std::span<const Var> inputs, BackwardFn backward, const char* op_name) {
    if (backward_done_) {
        throw UsageError("tape already differentiated; call reset() before recording again");
    }
    if (!value.all_finite()) {
        throw NumericError(std::string("non-finite output from ") + op_name);
    }
    Node node;
    node.value = std::move(value);
    node.backward = std::move(backward);
    node.name = op_name;
    for (Var v : inputs) {
        if (v.tape != this || v.id >= nodes_.size()) {
            throw UsageError(std::string(op_name) + ": input belongs to another tape");
        }
        node.inputs.push_back(v.id);
        node.requires_grad = node.requires_grad || nodes_[v.id].requires_grad;
    }
    nodes_.push_back(std::move(node));
    return {this, nodes_.size() - 1};
}

std::vector<ParameterGradient> Tape::backward(Var loss) {
    if (backward_done_) {
        throw UsageError("backward called twice on the same tape without reset()");
    }
    if (loss.tape != this || loss.id >= nodes_.size()) {
        throw UsageError("loss node is not on this tape");
    }
    const Matrix& lv = nodes_[loss.id].value;
    if (lv.rows() != 1 || lv.cols() != 1) {
        throw ShapeError("backward needs a scalar loss, got " + lv.shape_string());
    }
    backward_done_ = true;

    std::vector<Matrix> grads(loss.id + 1);
    grads[loss.id] = Matrix(1, 1, 1.0);
    std::vector<const Matrix*> in_values;
    std::vector<Matrix*> in_grads;
    for (std::size_t id = loss.id + 1; id-- > 0;) {
        Node& node = nodes_[id];
        if (!node.requires_grad || grads[id].empty() || node.inputs.empty()) {
            continue;
        }
        in_values.clear();
        in_grads.clear();
        for (std::size_t in : node.inputs) {
            in_values.push_back(&nodes_[in].value);
            if (nodes_[in].requires_grad) {
                if (grads[in].empty()) {
                    grads[in] = Matrix(nodes_[in].value.rows(), nodes_[in].value.cols());
                }
                in_grads.push_back(&grads[in]);
            } else {
                in_grads.push_back(nullptr);
            }
        }
        node.backward({node.value, grads[id], in_values, in_grads});
    }

    std::vector<ParameterGradient> out;
    for (std::size_t id = 0; id <= loss.id; ++id) {
        if (!nodes_[id].is_parameter) continue;
        Matrix g = grads[id].empty() ? Matrix(nodes_[id].value.rows(), nodes_[id].value.cols()) : std::move(grads[id]);
        out.push_back({Var{this, id}, std::move(g)});
    }
    return out;
}

void Tape::reset() {
    nodes_.clear();
    backward_done_ = false;
}

}  // namespace threadforge::nn
