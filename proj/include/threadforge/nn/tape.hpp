#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "threadforge/nn/matrix.hpp"

namespace threadforge::nn {

class Tape;

// Handle to a node recorded on a tape.
struct Var {
    Tape* tape = nullptr;
    std::size_t id = 0;

    const Matrix& value() const;
    std::size_t rows() const { return value().rows(); }
    std::size_t cols() const { return value().cols(); }
};

struct BackwardArgs {
    const Matrix& out_value;
    const Matrix& out_grad;
    std::span<const Matrix* const> in_values;
    std::span<Matrix* const> in_grads;  // nullptr where the input needs no gradient
};

using BackwardFn = std::function<void(const BackwardArgs&)>;

struct ParameterGradient {
    Var parameter;
    Matrix grad;
};

// Records primitive ops in creation order (which is topological) and runs
// reverse-mode differentiation once per recording.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var constant(Matrix value);
    Var parameter(Matrix value, std::string name = {});

    // Adds an op node. Every output entry must be finite.
    Var record(Matrix value, std::span<const Var> inputs, BackwardFn backward, const char* op_name);
    Var record(Matrix value, std::initializer_list<Var> inputs, BackwardFn backward, const char* op_name) {
        return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()), std::move(backward),
                      op_name);
    }

    const Matrix& value(Var v) const { return nodes_.at(v.id).value; }
    bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }
    const std::string& name(Var v) const { return nodes_.at(v.id).name; }

    // Gradients of the scalar `loss` for every parameter, in creation order.
    std::vector<ParameterGradient> backward(Var loss);

    void reset();
    std::size_t size() const noexcept { return nodes_.size(); }

private:
    struct Node {
        Matrix value;
        std::vector<std::size_t> inputs;
        BackwardFn backward;
        bool requires_grad = false;
        bool is_parameter = false;
        std::string name;
    };

    std::vector<Node> nodes_;
    bool backward_done_ = false;
};

}  // namespace threadforge::nn
