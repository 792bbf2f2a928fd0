#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>

#include "threadforge/nn/ops.hpp"

namespace threadforge::testing {

Dense to_dense(const nn::Matrix& m) {
    Dense d(m.rows(), std::vector<double>(m.cols()));
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) d[r][c] = m(r, c);
    return d;
}

Dense dense_matmul(const Dense& a, const Dense& b) {
    const std::size_t n = a.size(), k = b.size(), m = b.empty() ? 0 : b[0].size();
    Dense out(n, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            for (std::size_t t = 0; t < k; ++t) out[i][j] += a[i][t] * b[t][j];
    return out;
}

Dense oracle_normalized_adjacency(std::size_t n, const EdgeList& edges, bool symmetrized) {
    Dense a(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) a[i][i] = 1.0;
    for (auto [p, c] : edges) {
        a[p][c] += 1.0;
        if (symmetrized) a[c][p] += 1.0;
    }
    std::vector<double> d(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) d[i] += a[i][j];
    Dense out(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out[i][j] = a[i][j] / std::sqrt(d[i] * d[j]);
    return out;
}

namespace {

std::map<std::string, Dense> params_by_name(const models::Model& model) {
    std::map<std::string, Dense> out;
    for (const auto& t : model.to_tensors()) out[t.name] = to_dense(t.value);
    return out;
}

double act(double x, models::Activation a) { return a == models::Activation::relu ? std::max(0.0, x) : x; }

std::vector<double> mean_rows(const Dense& h) {
    std::vector<double> out(h[0].size(), 0.0);
    for (const auto& row : h)
        for (std::size_t c = 0; c < row.size(); ++c) out[c] += row[c];
    for (double& v : out) v /= static_cast<double>(h.size());
    return out;
}

std::vector<double> apply_mlp(std::vector<double> x, const models::Architecture& arch,
                              std::map<std::string, Dense>& p) {
    if (!arch.classifier_head) return x;
    const std::size_t layers = arch.mlp_hidden.size() + 1;
    for (std::size_t l = 0; l < layers; ++l) {
        const Dense& w = p["mlp.layer" + std::to_string(l) + ".weight"];
        const Dense& b = p["mlp.layer" + std::to_string(l) + ".bias"];
        std::vector<double> y(w[0].size(), 0.0);
        for (std::size_t j = 0; j < y.size(); ++j) {
            y[j] = b[0][j];
            for (std::size_t i = 0; i < x.size(); ++i) y[j] += x[i] * w[i][j];
            if (l + 1 < layers) y[j] = std::max(0.0, y[j]);
        }
        x = std::move(y);
    }
    return x;
}

}  // namespace

std::vector<double> oracle_gcn_logits(const Dense& features, const EdgeList& edges, const models::Model& model) {
    const auto& arch = model.arch;
    auto p = params_by_name(model);
    const Dense s = oracle_normalized_adjacency(features.size(), edges,
                                                arch.adjacency == models::AdjacencyMode::symmetrized);
    Dense h = features;
    for (std::size_t l = 0; l < arch.layers; ++l) {
        Dense next = dense_matmul(s, dense_matmul(h, p["gcn.layer" + std::to_string(l) + ".weight"]));
        for (auto& row : next)
            for (double& v : row) v = act(v, arch.activation);
        h = std::move(next);
    }
    return apply_mlp(mean_rows(h), arch, p);
}

std::vector<double> oracle_gat_logits(const Dense& features, const EdgeList& edges, const models::Model& model) {
    const auto& arch = model.arch;
    auto p = params_by_name(model);
    const std::size_t n = features.size();
    std::vector<std::set<std::size_t>> nbr(n);
    for (std::size_t i = 0; i < n; ++i) nbr[i].insert(i);
    for (auto [a, b] : edges) {
        nbr[a].insert(b);
        nbr[b].insert(a);
    }
    Dense h = features;
    for (std::size_t l = 0; l < arch.layers; ++l) {
        const bool last = l + 1 == arch.layers;
        std::vector<Dense> heads;
        for (std::size_t k = 0; k < arch.heads; ++k) {
            const std::string prefix = "gat.layer" + std::to_string(l) + ".head" + std::to_string(k);
            const Dense z = dense_matmul(h, p[prefix + ".projection"]);
            const Dense& a = p[prefix + ".attention"];
            const std::size_t f = z[0].size();
            Dense out(n, std::vector<double>(f, 0.0));
            for (std::size_t i = 0; i < n; ++i) {
                std::vector<double> score;
                for (std::size_t j : nbr[i]) {
                    double e = 0.0;
                    for (std::size_t c = 0; c < f; ++c) e += a[c][0] * z[i][c] + a[f + c][0] * z[j][c];
                    score.push_back(e > 0 ? e : arch.attention_slope * e);
                }
                const double mx = *std::max_element(score.begin(), score.end());
                double total = 0.0;
                for (double& s : score) total += (s = std::exp(s - mx));
                std::size_t idx = 0;
                for (std::size_t j : nbr[i]) {
                    const double alpha = score[idx++] / total;
                    for (std::size_t c = 0; c < f; ++c) out[i][c] += alpha * z[j][c];
                }
            }
            heads.push_back(std::move(out));
        }
        Dense next(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (last) {
                next[i].assign(heads[0][i].size(), 0.0);
                for (const auto& hk : heads)
                    for (std::size_t c = 0; c < hk[i].size(); ++c) next[i][c] += hk[i][c];
                for (double& v : next[i]) v = act(v / static_cast<double>(heads.size()), arch.activation);
            } else {
                for (const auto& hk : heads)
                    for (double v : hk[i]) next[i].push_back(act(v, arch.activation));
            }
        }
        h = std::move(next);
    }
    return apply_mlp(mean_rows(h), arch, p);
}

double batch_loss(const models::Model& model, const models::GraphBatch& batch, const std::vector<std::size_t>& labels) {
    const nn::Matrix logits = models::predict_logits(model, batch);
    double total = 0.0;
    for (std::size_t r = 0; r < logits.rows(); ++r) {
        double mx = logits(r, 0);
        for (std::size_t c = 1; c < logits.cols(); ++c) mx = std::max(mx, logits(r, c));
        double z = 0.0;
        for (std::size_t c = 0; c < logits.cols(); ++c) z += std::exp(logits(r, c) - mx);
        total += mx + std::log(z) - logits(r, labels[r]);
    }
    return total / static_cast<double>(logits.rows());
}

GradientCheck check_gradients(models::Model model, const models::GraphBatch& batch,
                              const std::vector<std::size_t>& labels, double h, double floor) {
    nn::Tape tape;
    const nn::Var loss = nn::cross_entropy(models::forward(tape, model, batch), labels);
    const auto grads = tape.backward(loss);
    auto params = model.parameters();
    GradientCheck out;
    for (std::size_t p = 0; p < params.size(); ++p) {
        auto& values = params[p].value->data();
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double saved = values[i];
            values[i] = saved + h;
            const double up = batch_loss(model, batch, labels);
            values[i] = saved - h;
            const double down = batch_loss(model, batch, labels);
            values[i] = saved;
            const double numeric = (up - down) / (2 * h);
            const double analytic = grads[p].grad.data()[i];
            const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
            out.max_rel_error = std::max(out.max_rel_error, std::abs(analytic - numeric) / denom);
            ++out.entries;
        }
    }
    return out;
}

}  // namespace threadforge::testing
