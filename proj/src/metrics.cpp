#include "lobtrend/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "lobtrend/errors.hpp"

namespace lobtrend::metrics {

int64_t ConfusionMatrix::total() const {
    int64_t n = 0;
    for (const auto& row : counts)
        for (int64_t c : row) n += c;
    return n;
}

int64_t ConfusionMatrix::true_count(int cls) const {
    int64_t n = 0;
    for (int64_t c : counts[static_cast<size_t>(cls)]) n += c;
    return n;
}

int64_t ConfusionMatrix::pred_count(int cls) const {
    int64_t n = 0;
    for (const auto& row : counts) n += row[static_cast<size_t>(cls)];
    return n;
}

ConfusionMatrix confusion(const std::vector<int>& truth, const std::vector<int>& pred) {
    if (truth.empty()) throw DataError("confusion: empty input");
    if (truth.size() != pred.size())
        throw DataError("confusion: " + std::to_string(truth.size()) + " truths vs " +
                        std::to_string(pred.size()) + " predictions");
    ConfusionMatrix cm;
    for (size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] < 0 || truth[i] > 2 || pred[i] < 0 || pred[i] > 2)
            throw DataError("confusion: label outside {0,1,2} at index " + std::to_string(i));
        ++cm.counts[static_cast<size_t>(truth[i])][static_cast<size_t>(pred[i])];
    }
    return cm;
}

PerClassScores per_class_scores(const ConfusionMatrix& cm) {
    PerClassScores s;
    for (int c = 0; c < 3; ++c) {
        const auto tp = static_cast<double>(cm.counts[c][c]);
        const auto fp = static_cast<double>(cm.pred_count(c)) - tp;
        const auto fn = static_cast<double>(cm.true_count(c)) - tp;
        s.precision[c] = tp + fp > 0 ? tp / (tp + fp) : 0.0;
        s.recall[c] = tp + fn > 0 ? tp / (tp + fn) : 0.0;
        const double pr = s.precision[c] + s.recall[c];
        s.f1[c] = pr > 0 ? 2.0 * s.precision[c] * s.recall[c] / pr : 0.0;
    }
    return s;
}

double f1_macro(const std::vector<int>& truth, const std::vector<int>& pred) {
    auto s = per_class_scores(confusion(truth, pred));
    return (s.f1[0] + s.f1[1] + s.f1[2]) / 3.0;
}

double f1_weighted(const std::vector<int>& truth, const std::vector<int>& pred) {
    auto cm = confusion(truth, pred);
    auto s = per_class_scores(cm);
    double weighted = 0.0;
    for (int c = 0; c < 3; ++c)
        weighted += s.f1[c] * static_cast<double>(cm.true_count(c));
    return weighted / static_cast<double>(cm.total());
}

PrCurve pr_curve(const std::vector<int>& truth, const std::vector<double>& scores,
                 int positive_class) {
    if (truth.empty()) throw DataError("pr_curve: empty input");
    if (truth.size() != scores.size())
        throw DataError("pr_curve: truth/score length mismatch");

    const int64_t n = static_cast<int64_t>(truth.size());
    int64_t positives = 0;
    for (int t : truth) positives += t == positive_class ? 1 : 0;

    PrCurve curve;
    curve.degenerate = positives == 0 || positives == n;
    if (positives == 0) return curve;

    std::vector<int64_t> order(truth.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&scores](int64_t a, int64_t b) {
        return scores[static_cast<size_t>(a)] > scores[static_cast<size_t>(b)];
    });

    // Recall-0 endpoint: the precision of the single most confident prediction.
    const bool top_positive = truth[static_cast<size_t>(order[0])] == positive_class;
    curve.points.push_back({scores[static_cast<size_t>(order[0])], 0.0,
                            top_positive ? 1.0 : 0.0});

    int64_t tp = 0, fp = 0;
    size_t i = 0;
    while (i < order.size()) {
        const double threshold = scores[static_cast<size_t>(order[i])];
        // Consume every sample tied at this threshold before emitting a point.
        while (i < order.size() && scores[static_cast<size_t>(order[i])] == threshold) {
            if (truth[static_cast<size_t>(order[i])] == positive_class) ++tp;
            else ++fp;
            ++i;
        }
        PrPoint p;
        p.threshold = threshold;
        p.recall = static_cast<double>(tp) / static_cast<double>(positives);
        p.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        curve.points.push_back(p);
    }
    return curve;
}

} // namespace lobtrend::metrics
