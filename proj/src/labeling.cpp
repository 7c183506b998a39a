#include "lobtrend/labeling.hpp"

#include <cmath>
#include <string>

#include "lobtrend/errors.hpp"

namespace lobtrend {

TrendLabel classify_trend(double pct_change, double theta) {
    if (theta < 0.0) throw ConfigError("classify_trend: theta must be >= 0");
    if (pct_change > theta) return TrendLabel::Up;
    if (pct_change < -theta) return TrendLabel::Down;
    return TrendLabel::Stable;
}

namespace {

std::vector<TrendLabel> classify_all(const std::vector<double>& changes, double theta) {
    std::vector<TrendLabel> labels;
    labels.reserve(changes.size());
    for (double l : changes) labels.push_back(classify_trend(l, theta));
    return labels;
}

} // namespace

std::vector<double> pct_change_fi2010(const MidPriceSeries& prices, int64_t h) {
    const int64_t n = prices.size();
    if (h < 1) throw ConfigError("label_fi2010: horizon must be >= 1");
    if (n <= h)
        throw DataError("label_fi2010: series of length " + std::to_string(n) +
                        " too short for horizon " + std::to_string(h));
    std::vector<double> out;
    out.reserve(static_cast<size_t>(n - h));
    for (int64_t t = 0; t + h < n; ++t) {
        double sum = 0.0;
        for (int64_t i = 0; i <= h; ++i) sum += prices.values[static_cast<size_t>(t + i)];
        const double future_mean = sum / static_cast<double>(h + 1);
        const double p = prices.values[static_cast<size_t>(t)];
        out.push_back((future_mean - p) / p);
    }
    return out;
}

std::vector<double> pct_change_decoupled(const MidPriceSeries& prices, int64_t h, int64_t k) {
    const int64_t n = prices.size();
    if (h < 1) throw ConfigError("label_decoupled: horizon must be >= 1");
    if (k < 0) throw ConfigError("label_decoupled: window must be >= 0");
    if (k > h)
        throw ConfigError("label_decoupled: window k=" + std::to_string(k) +
                          " exceeds horizon h=" + std::to_string(h) +
                          "; the future window would reach past prices");
    if (n <= h + k)
        throw DataError("label_decoupled: series of length " + std::to_string(n) +
                        " too short for horizon " + std::to_string(h) + " and window " +
                        std::to_string(k));
    std::vector<double> out;
    out.reserve(static_cast<size_t>(n - h - k));
    // Windows are summed in ascending index order and averaged by division.
    // The subtraction of two nearby means amplifies any rounding difference,
    // so the exact evaluation order is part of the numeric contract.
    for (int64_t t = k; t + h < n; ++t) {
        double future_sum = 0.0;
        double past_sum = 0.0;
        for (int64_t i = 0; i <= k; ++i) {
            future_sum += prices.values[static_cast<size_t>(t + h - k + i)];
            past_sum += prices.values[static_cast<size_t>(t - k + i)];
        }
        const double future_mean = future_sum / static_cast<double>(k + 1);
        const double past_mean = past_sum / static_cast<double>(k + 1);
        out.push_back((future_mean - past_mean) / past_mean);
    }
    return out;
}

LabeledSeries label_fi2010(const MidPriceSeries& prices, int64_t h, double theta) {
    LabeledSeries out;
    out.pct_change = pct_change_fi2010(prices, h);
    out.labels = classify_all(out.pct_change, theta);
    out.first_index = 0;
    out.theta = theta;
    return out;
}

LabeledSeries label_decoupled(const MidPriceSeries& prices, int64_t h, int64_t k,
                              double theta) {
    LabeledSeries out;
    out.pct_change = pct_change_decoupled(prices, h, k);
    out.labels = classify_all(out.pct_change, theta);
    out.first_index = k;
    out.theta = theta;
    return out;
}

LabeledSeries label_symmetric(const MidPriceSeries& prices, int64_t k, double theta) {
    if (k < 0) throw ConfigError("label_symmetric: window must be >= 0");
    if (k == 0) {
        // Degenerate window: both means collapse to p(t), so l is 0
        // everywhere and every point is labelable.
        LabeledSeries out;
        out.pct_change.assign(static_cast<size_t>(prices.size()), 0.0);
        out.labels = classify_all(out.pct_change, theta);
        out.first_index = 0;
        out.theta = theta;
        return out;
    }
    // Identical arithmetic to the decoupled method at h == k; the reduction
    // identity is exact by construction.
    return label_decoupled(prices, k, k, theta);
}

double theta_balanced(const std::vector<double>& pct_changes) {
    if (pct_changes.empty()) throw DataError("theta_balanced: empty input");
    double sum = 0.0;
    for (double l : pct_changes) sum += std::fabs(l);
    return sum / static_cast<double>(pct_changes.size());
}

double theta_spread(const std::vector<LobRecord>& snapshots) {
    if (snapshots.empty()) throw DataError("theta_spread: empty input");
    double sum = 0.0;
    for (const auto& r : snapshots) sum += relative_spread(r);
    return sum / static_cast<double>(snapshots.size());
}

ClassDistribution class_distribution(const std::vector<TrendLabel>& labels) {
    if (labels.empty()) throw DataError("class_distribution: empty input");
    ClassDistribution d;
    for (TrendLabel l : labels) {
        switch (l) {
            case TrendLabel::Up: d.up += 1.0; break;
            case TrendLabel::Stable: d.stable += 1.0; break;
            case TrendLabel::Down: d.down += 1.0; break;
        }
    }
    const double n = static_cast<double>(labels.size());
    d.up /= n;
    d.stable /= n;
    d.down /= n;
    return d;
}

namespace {

std::vector<double> pct_change_for(const MidPriceSeries& prices, const LabelingSpec& spec) {
    switch (spec.method) {
        case LabelMethod::Fi2010:
            return pct_change_fi2010(prices, spec.horizon);
        case LabelMethod::SymmetricSmoothing:
            return spec.horizon == 0
                       ? std::vector<double>(static_cast<size_t>(prices.size()), 0.0)
                       : pct_change_decoupled(prices, spec.horizon, spec.horizon);
        case LabelMethod::Decoupled:
            return pct_change_decoupled(prices, spec.horizon, spec.window);
    }
    throw ConfigError("unknown labeling method");
}

} // namespace

double resolve_theta(const LabelingSpec& spec, const MidPriceSeries& train_prices,
                     const std::vector<LobRecord>& train_snapshots) {
    switch (spec.theta_policy) {
        case ThetaPolicy::Explicit:
            if (spec.theta < 0.0) throw ConfigError("theta must be >= 0");
            return spec.theta;
        case ThetaPolicy::BalancedMeanAbs:
            return theta_balanced(pct_change_for(train_prices, spec));
        case ThetaPolicy::AvgSpread:
            return theta_spread(train_snapshots);
    }
    throw ConfigError("unknown theta policy");
}

LabeledSeries label_with_method(const MidPriceSeries& prices, const LabelingSpec& spec,
                                double theta) {
    switch (spec.method) {
        case LabelMethod::Fi2010:
            return label_fi2010(prices, spec.horizon, theta);
        case LabelMethod::SymmetricSmoothing:
            return label_symmetric(prices, spec.horizon, theta);
        case LabelMethod::Decoupled:
            return label_decoupled(prices, spec.horizon, spec.window, theta);
    }
    throw ConfigError("unknown labeling method");
}

} // namespace lobtrend
