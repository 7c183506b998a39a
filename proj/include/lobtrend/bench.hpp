#pragma once

#include <algorithm>
#include <chrono>
#include <vector>

#include "lobtrend/models.hpp"

namespace lobtrend::bench {

struct LatencyReport {
    int trials = 0;
    int warmup = 0;
    double median_ms = 0.0;
    double p95_ms = 0.0;
    double mean_ms = 0.0;
    double min_ms = 0.0;
    double max_ms = 0.0;
};

// Wall-clock per-window forward time (batch of one). No pass/fail: the
// numbers are hardware-dependent.
template <class S>
LatencyReport latency_bench(const nn::Model<S>& model, int trials, uint64_t seed = 0) {
    if (trials < 1) throw ConfigError("latency_bench: trials must be >= 1");
    ad::NoGradGuard ng;
    const auto& cfg = model.config();
    Rng rng(seed);
    std::vector<S> data(static_cast<size_t>(cfg.window * cfg.features));
    for (auto& v : data) v = static_cast<S>(rng.normal());
    auto x = ad::Tensor<S>::from({1, cfg.window, cfg.features}, std::move(data));

    LatencyReport report;
    report.trials = trials;
    report.warmup = 10;
    for (int i = 0; i < report.warmup; ++i) (void)model.forward(x);

    std::vector<double> times_ms;
    times_ms.reserve(static_cast<size_t>(trials));
    for (int i = 0; i < trials; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        (void)model.forward(x);
        const auto t1 = std::chrono::steady_clock::now();
        times_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    std::sort(times_ms.begin(), times_ms.end());
    const size_t n = times_ms.size();
    report.median_ms = times_ms[n / 2];
    report.p95_ms = times_ms[std::min(n - 1, static_cast<size_t>(0.95 * static_cast<double>(n)))];
    report.min_ms = times_ms.front();
    report.max_ms = times_ms.back();
    double sum = 0.0;
    for (double t : times_ms) sum += t;
    report.mean_ms = sum / static_cast<double>(n);
    return report;
}

} // namespace lobtrend::bench
