#pragma once

#include <string>
#include <vector>

#include "lobtrend/labeling.hpp"
#include "lobtrend/metrics.hpp"

namespace lobtrend::report {

// One evaluated (model, horizon) cell: stored predictions are enough to
// rebuild every figure without re-training.
struct EvalCell {
    std::string model_name;
    int horizon = 0;
    double theta = 0.0;
    std::vector<int> truth;
    std::vector<int> predictions;
    std::vector<double> probabilities; // [n,3] row-major, order D,S,U
};

// Writes f1_table.csv, per-cell confusion matrices, class-distribution table,
// PR-curve SVGs (one polyline per model, one file per horizon/class), and a
// JSON summary into `dir`. Throws DataError naming any missing input.
void experiment_report(const std::string& dir, const std::vector<EvalCell>& cells);

// Standalone SVG renderer for precision-recall curves.
std::string pr_curve_svg(const std::vector<std::pair<std::string, metrics::PrCurve>>& curves,
                         const std::string& title);

} // namespace lobtrend::report
