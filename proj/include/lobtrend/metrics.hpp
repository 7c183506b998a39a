#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace lobtrend::metrics {

// 3x3 counts indexed [true][predicted] over the label codes 0=D, 1=S, 2=U.
struct ConfusionMatrix {
    std::array<std::array<int64_t, 3>, 3> counts{};

    int64_t total() const;
    int64_t true_count(int cls) const;  // row sum
    int64_t pred_count(int cls) const;  // column sum
};

ConfusionMatrix confusion(const std::vector<int>& truth, const std::vector<int>& pred);

struct PerClassScores {
    std::array<double, 3> precision{};
    std::array<double, 3> recall{};
    std::array<double, 3> f1{};
};

// Zero-division convention: a class with no true samples and no predictions
// scores 0.
PerClassScores per_class_scores(const ConfusionMatrix& cm);

// Unweighted mean of per-class F1 over the three classes (headline metric).
double f1_macro(const std::vector<int>& truth, const std::vector<int>& pred);

// Support-weighted mean, reported alongside macro.
double f1_weighted(const std::vector<int>& truth, const std::vector<int>& pred);

struct PrPoint {
    double threshold = 0.0;
    double recall = 0.0;
    double precision = 0.0;
};

struct PrCurve {
    std::vector<PrPoint> points; // sorted by recall ascending
    bool degenerate = false;     // truth contains a single class
};

// One-vs-rest sweep over all distinct score values (descending thresholds,
// predict positive when score >= threshold). `scores` is the probability of
// `positive_class` per sample. The recall-0 endpoint carries the precision of
// the single highest-scored prediction.
PrCurve pr_curve(const std::vector<int>& truth, const std::vector<double>& scores,
                 int positive_class);

} // namespace lobtrend::metrics
