#include "threadforge/eval/metrics.hpp"

#include <string>

#include "threadforge/common/error.hpp"

namespace threadforge::eval {

namespace {

double ratio(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double harmonic(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

}  // namespace

Metrics compute_metrics(std::span<const std::size_t> preds, std::span<const std::size_t> truth, LabelScheme scheme) {
    if (preds.empty()) throw UsageError("compute_metrics: no predictions");
    if (preds.size() != truth.size()) {
        throw UsageError("compute_metrics: " + std::to_string(preds.size()) + " predictions for " +
                         std::to_string(truth.size()) + " labels");
    }
    const std::size_t c = num_classes(scheme);
    Metrics m;
    m.scheme = scheme;
    m.total = preds.size();
    m.confusion.assign(c, std::vector<std::size_t>(c, 0));
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (preds[i] >= c || truth[i] >= c) {
            throw DataError("compute_metrics: class index out of range at position " + std::to_string(i));
        }
        ++m.confusion[truth[i]][preds[i]];
    }

    std::size_t correct = 0, tp_sum = 0, fp_sum = 0, fn_sum = 0;
    m.per_class.resize(c);
    for (std::size_t k = 0; k < c; ++k) {
        const std::size_t tp = m.confusion[k][k];
        std::size_t predicted = 0, actual = 0;
        for (std::size_t j = 0; j < c; ++j) {
            predicted += m.confusion[j][k];
            actual += m.confusion[k][j];
        }
        correct += tp;
        tp_sum += tp;
        fp_sum += predicted - tp;
        fn_sum += actual - tp;
        auto& pc = m.per_class[k];
        pc.support = actual;
        pc.precision = ratio(tp, predicted);
        pc.recall = ratio(tp, actual);
        pc.f1 = harmonic(pc.precision, pc.recall);
        m.macro_f1 += pc.f1;
    }
    m.macro_f1 /= static_cast<double>(c);
    m.accuracy = ratio(correct, m.total);
    m.micro_f1 = harmonic(ratio(tp_sum, tp_sum + fp_sum), ratio(tp_sum, tp_sum + fn_sum));
    return m;
}

}  // namespace threadforge::eval
