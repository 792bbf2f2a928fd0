#include "threadforge/nn/ops.hpp"

#include <algorithm>
#include <cmath>

#include "threadforge/common/error.hpp"

namespace threadforge::nn {

namespace {

void require_same_tape(Var a, Var b, const char* op) {
    if (a.tape != b.tape) {
        throw UsageError(std::string(op) + ": operands live on different tapes");
    }
}

[[noreturn]] void shape_mismatch(const char* op, const Matrix& a, const Matrix& b) {
    throw ShapeError(std::string(op) + " shape mismatch: " + a.shape_string() + " vs " + b.shape_string());
}

}  // namespace

Var matmul(Var a, Var b) {
    require_same_tape(a, b, "matmul");
    const Matrix& av = a.value();
    const Matrix& bv = b.value();
    if (av.cols() != bv.rows()) shape_mismatch("matmul", av, bv);
    return a.tape->record(nn::matmul(av, bv), {a, b},
                          [](const BackwardArgs& g) {
                              // dA = G B^T, dB = A^T G
                              if (g.in_grads[0]) matmul_a_bt_accumulate(g.out_grad, *g.in_values[1], *g.in_grads[0]);
                              if (g.in_grads[1]) matmul_at_b_accumulate(*g.in_values[0], g.out_grad, *g.in_grads[1]);
                          },
                          "matmul");
}

Var add(Var a, Var b) {
    require_same_tape(a, b, "add");
    const Matrix& av = a.value();
    const Matrix& bv = b.value();
    if (av.rows() != bv.rows() || av.cols() != bv.cols()) shape_mismatch("add", av, bv);
    Matrix out = av;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += bv.data()[i];
    return a.tape->record(std::move(out), {a, b},
                          [](const BackwardArgs& g) {
                              for (Matrix* dst : g.in_grads) {
                                  if (!dst) continue;
                                  for (std::size_t i = 0; i < dst->size(); ++i) dst->data()[i] += g.out_grad.data()[i];
                              }
                          },
                          "add");
}

Var add_bias(Var x, Var bias) {
    require_same_tape(x, bias, "add_bias");
    const Matrix& xv = x.value();
    const Matrix& bv = bias.value();
    if (bv.rows() != 1 || bv.cols() != xv.cols()) shape_mismatch("add_bias", xv, bv);
    Matrix out = xv;
    for (std::size_t r = 0; r < out.rows(); ++r)
        for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += bv(0, c);
    return x.tape->record(std::move(out), {x, bias},
                          [](const BackwardArgs& g) {
                              if (Matrix* dx = g.in_grads[0]) {
                                  for (std::size_t i = 0; i < dx->size(); ++i) dx->data()[i] += g.out_grad.data()[i];
                              }
                              if (Matrix* db = g.in_grads[1]) {
                                  for (std::size_t r = 0; r < g.out_grad.rows(); ++r)
                                      for (std::size_t c = 0; c < g.out_grad.cols(); ++c) (*db)(0, c) += g.out_grad(r, c);
                              }
                          },
                          "add_bias");
}

Var scale(Var x, double factor) {
    Matrix out = x.value();
    for (double& v : out.data()) v *= factor;
    return x.tape->record(std::move(out), {x},
                          [factor](const BackwardArgs& g) {
                              if (Matrix* dx = g.in_grads[0]) {
                                  for (std::size_t i = 0; i < dx->size(); ++i) dx->data()[i] += factor * g.out_grad.data()[i];
                              }
                          },
                          "scale");
}

Var leaky_relu(Var x, double slope) {
    Matrix out = x.value();
    for (double& v : out.data()) v = v > 0.0 ? v : slope * v;
    return x.tape->record(std::move(out), {x},
                          [slope](const BackwardArgs& g) {
                              Matrix* dx = g.in_grads[0];
                              if (!dx) return;
                              const Matrix& in = *g.in_values[0];
                              for (std::size_t i = 0; i < dx->size(); ++i) {
                                  dx->data()[i] += (in.data()[i] > 0.0 ? 1.0 : slope) * g.out_grad.data()[i];
                              }
                          },
                          slope == 0.0 ? "relu" : "leaky_relu");
}

Var relu(Var x) { return leaky_relu(x, 0.0); }

Var row_softmax(Var x) {
    const Matrix& xv = x.value();
    Matrix out(xv.rows(), xv.cols());
    for (std::size_t r = 0; r < xv.rows(); ++r) {
        auto in = xv.row(r);
        auto o = out.row(r);
        const double mx = *std::max_element(in.begin(), in.end());
        double total = 0.0;
        for (std::size_t c = 0; c < in.size(); ++c) {
            o[c] = std::exp(in[c] - mx);
            total += o[c];
        }
        for (double& v : o) v /= total;
    }
    return x.tape->record(std::move(out), {x},
                          [](const BackwardArgs& g) {
                              Matrix* dx = g.in_grads[0];
                              if (!dx) return;
                              const Matrix& y = g.out_value;
                              for (std::size_t r = 0; r < y.rows(); ++r) {
                                  double dot = 0.0;
                                  for (std::size_t c = 0; c < y.cols(); ++c) dot += g.out_grad(r, c) * y(r, c);
                                  for (std::size_t c = 0; c < y.cols(); ++c) (*dx)(r, c) += y(r, c) * (g.out_grad(r, c) - dot);
                              }
                          },
                          "row_softmax");
}

Var row_mean(Var x) {
    const std::size_t offsets[] = {0, x.rows()};
    return segment_mean(x, offsets);
}

Var segment_mean(Var x, std::span<const std::size_t> offsets) {
    const Matrix& xv = x.value();
    if (offsets.size() < 2 || offsets.front() != 0 || offsets.back() != xv.rows()) {
        throw ShapeError("segment_mean offsets do not cover the " + xv.shape_string() + " input");
    }
    const std::size_t groups = offsets.size() - 1;
    Matrix out(groups, xv.cols());
    for (std::size_t g = 0; g < groups; ++g) {
        const std::size_t lo = offsets[g], hi = offsets[g + 1];
        if (hi <= lo) throw ShapeError("segment_mean: empty segment " + std::to_string(g));
        for (std::size_t r = lo; r < hi; ++r)
            for (std::size_t c = 0; c < xv.cols(); ++c) out(g, c) += xv(r, c);
        const double inv = 1.0 / static_cast<double>(hi - lo);
        for (std::size_t c = 0; c < xv.cols(); ++c) out(g, c) *= inv;
    }
    std::vector<std::size_t> segs(offsets.begin(), offsets.end());
    return x.tape->record(std::move(out), {x},
                          [segs = std::move(segs)](const BackwardArgs& g) {
                              Matrix* dx = g.in_grads[0];
                              if (!dx) return;
                              for (std::size_t s = 0; s + 1 < segs.size(); ++s) {
                                  const double inv = 1.0 / static_cast<double>(segs[s + 1] - segs[s]);
                                  for (std::size_t r = segs[s]; r < segs[s + 1]; ++r)
                                      for (std::size_t c = 0; c < dx->cols(); ++c) (*dx)(r, c) += inv * g.out_grad(s, c);
                              }
                          },
                          "segment_mean");
}

Var concat_cols(std::span<const Var> parts) {
    if (parts.empty()) {
        throw ShapeError("concat_cols needs at least one input");
    }
    Tape* tape = parts.front().tape;
    const std::size_t rows = parts.front().rows();
    std::size_t cols = 0;
    for (Var p : parts) {
        require_same_tape(parts.front(), p, "concat_cols");
        if (p.rows() != rows) shape_mismatch("concat_cols", parts.front().value(), p.value());
        cols += p.cols();
    }
    Matrix out(rows, cols);
    std::size_t off = 0;
    for (Var p : parts) {
        const Matrix& v = p.value();
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < v.cols(); ++c) out(r, off + c) = v(r, c);
        off += v.cols();
    }
    return tape->record(std::move(out), parts,
                        [](const BackwardArgs& g) {
                            std::size_t off = 0;
                            for (std::size_t k = 0; k < g.in_values.size(); ++k) {
                                const std::size_t w = g.in_values[k]->cols();
                                if (Matrix* d = g.in_grads[k]) {
                                    for (std::size_t r = 0; r < d->rows(); ++r)
                                        for (std::size_t c = 0; c < w; ++c) (*d)(r, c) += g.out_grad(r, off + c);
                                }
                                off += w;
                            }
                        },
                        "concat_cols");
}

Var sum(Var x) {
    double total = 0.0;
    for (double v : x.value().data()) total += v;
    return x.tape->record(Matrix(1, 1, total), {x},
                          [](const BackwardArgs& g) {
                              if (Matrix* d = g.in_grads[0])
                                  for (double& v : d->data()) v += g.out_grad(0, 0);
                          },
                          "sum");
}

std::vector<double> log_softmax(std::span<const double> logits) {
    const double mx = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    for (double v : logits) total += std::exp(v - mx);
    const double lse = mx + std::log(total);
    std::vector<double> out(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
    return out;
}

std::size_t argmax(std::span<const double> values) {
    return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

Var cross_entropy(Var logits, std::span<const std::size_t> labels) {
    const Matrix& lv = logits.value();
    if (labels.size() != lv.rows() || lv.rows() == 0) {
        throw ShapeError("cross_entropy: " + std::to_string(labels.size()) + " labels for " + lv.shape_string() +
                         " logits");
    }
    Matrix probs(lv.rows(), lv.cols());
    double loss = 0.0;
    for (std::size_t r = 0; r < lv.rows(); ++r) {
        if (labels[r] >= lv.cols()) {
            throw ShapeError("cross_entropy: label " + std::to_string(labels[r]) + " out of range for " +
                             std::to_string(lv.cols()) + " classes");
        }
        const auto ls = log_softmax(lv.row(r));
        loss -= ls[labels[r]];
        for (std::size_t c = 0; c < lv.cols(); ++c) probs(r, c) = std::exp(ls[c]);
    }
    const double inv_n = 1.0 / static_cast<double>(lv.rows());
    std::vector<std::size_t> targets(labels.begin(), labels.end());
    return logits.tape->record(Matrix(1, 1, loss * inv_n), {logits},
                               [probs = std::move(probs), targets = std::move(targets), inv_n](const BackwardArgs& g) {
                                   Matrix* d = g.in_grads[0];
                                   if (!d) return;
                                   const double scale = g.out_grad(0, 0) * inv_n;
                                   for (std::size_t r = 0; r < probs.rows(); ++r)
                                       for (std::size_t c = 0; c < probs.cols(); ++c)
                                           (*d)(r, c) += scale * (probs(r, c) - (c == targets[r] ? 1.0 : 0.0));
                               },
                               "cross_entropy");
}

}  // namespace threadforge::nn
