#pragma once

#include <cstdint>
#include <vector>

#include "lobtrend/lob.hpp"

namespace lobtrend {

enum class LabelMethod { Fi2010, SymmetricSmoothing, Decoupled };
enum class ThetaPolicy { Explicit, BalancedMeanAbs, AvgSpread };

// Fully determines the label of each timestamp. For the fi2010 and
// symmetric-smoothing methods the smoothing window equals the horizon.
struct LabelingSpec {
    LabelMethod method = LabelMethod::Decoupled;
    int64_t horizon = 10;  // h, sampled steps ahead
    int64_t window = 0;    // k, smoothing steps per side
    double theta = 0.0;
    ThetaPolicy theta_policy = ThetaPolicy::Explicit;
};

// Labels plus the underlying percentage changes. first_index is the 0-based
// position in the source price series of labels[0]; entries before it and
// after last_index() have no defined label because the formula's window does
// not fit.
struct LabeledSeries {
    std::vector<TrendLabel> labels;
    std::vector<double> pct_change;
    int64_t first_index = 0;
    double theta = 0.0;

    int64_t size() const { return static_cast<int64_t>(labels.size()); }
    int64_t last_index() const { return first_index + size() - 1; }
};

// U if l > theta, D if l < -theta, S otherwise (boundaries inclusive to S).
TrendLabel classify_trend(double pct_change, double theta);

// Percentage change of the mean of p(t..t+h) against p(t): the convention of
// the FI-2010 benchmark. Valid for t in [0, N-1-h].
LabeledSeries label_fi2010(const MidPriceSeries& prices, int64_t h, double theta);

// Symmetric smoothing: mean of p(t..t+k) against mean of p(t-k..t); the
// window equals the horizon. Valid for t in [k, N-1-k].
LabeledSeries label_symmetric(const MidPriceSeries& prices, int64_t k, double theta);

// Decoupled horizon/window: mean of p(t+h-k..t+h) against mean of p(t-k..t).
// Requires k <= h so the future window stays inside (t, t+h]. Valid for t in
// [k, N-1-h]. With k == h this reduces element-for-element to the symmetric
// method, and with k == 0 to the plain h-step percentage change.
LabeledSeries label_decoupled(const MidPriceSeries& prices, int64_t h, int64_t k,
                              double theta);

// Percentage changes only (no classification); same validity windows.
std::vector<double> pct_change_fi2010(const MidPriceSeries& prices, int64_t h);
std::vector<double> pct_change_decoupled(const MidPriceSeries& prices, int64_t h, int64_t k);

// Threshold equal to the mean absolute percentage change, so that roughly
// half the mass of l falls inside [-theta, theta].
double theta_balanced(const std::vector<double>& pct_changes);

// Threshold equal to the average spread as a fraction of the mid-price.
double theta_spread(const std::vector<LobRecord>& snapshots);

struct ClassDistribution {
    double up = 0.0, stable = 0.0, down = 0.0;
};

ClassDistribution class_distribution(const std::vector<TrendLabel>& labels);

// Resolves theta per policy on training data, then labels each partition
// with the frozen value.
double resolve_theta(const LabelingSpec& spec, const MidPriceSeries& train_prices,
                     const std::vector<LobRecord>& train_snapshots);
LabeledSeries label_with_method(const MidPriceSeries& prices, const LabelingSpec& spec,
                                double theta);

} // namespace lobtrend
