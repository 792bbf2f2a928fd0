#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "threadforge/eval/experiment.hpp"

namespace threadforge::eval {

// Tab-separated tables. Leading "# key=value" lines carry run metadata.
// results:     variant model fold accuracy micro_f1 macro_f1 (one row per fold, then "aggregate")
// predictions: variant model fold thread_id truth prediction
// curve:       variant model fold delay_hours accuracy macro_f1
void write_results(std::ostream& out, const std::vector<LoocvResult>& results, std::uint64_t seed);
void write_predictions(std::ostream& out, const std::vector<LoocvResult>& results, LabelScheme scheme,
                       std::uint64_t seed);
void write_curve(std::ostream& out, const std::vector<EarlyResult>& results, std::uint64_t seed);

struct CurveRow {
    std::string variant;
    std::string model;
    std::string fold;
    double delay_hours = 0.0;
    double accuracy = 0.0;
    double macro_f1 = 0.0;
};

std::vector<CurveRow> read_curve(std::istream& in, const std::string& source_name);

// Line chart of the aggregate accuracy curve of every (variant, model) pair;
// checkpoints are spaced evenly and labelled with their delay.
std::string render_curve_svg(const std::vector<CurveRow>& rows, const std::string& title);

std::string format_delay(double hours);

}  // namespace threadforge::eval
