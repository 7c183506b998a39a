#include "lobtrend/synth.hpp"

#include <cmath>
#include <sstream>

#include "lobtrend/errors.hpp"
#include "lobtrend/rng.hpp"

namespace lobtrend {

DatasetBundle synth_lob(uint64_t seed, int64_t n, const SynthRegime& regime,
                        int levels, int days) {
    if (n < 1) throw ConfigError("synth_lob: n must be >= 1");
    if (levels < 1) throw ConfigError("synth_lob: levels must be >= 1");
    if (days < 1) throw ConfigError("synth_lob: days must be >= 1");
    if (regime.kind == SynthRegime::Kind::Momentum &&
        (regime.persistence <= -1.0 || regime.persistence >= 1.0))
        throw ConfigError("synth_lob: persistence must be in (-1, 1)");

    Rng rng(seed);
    DatasetBundle bundle;
    bundle.origin = "synth";
    bundle.snapshots.reserve(n);
    bundle.events.reserve(n);
    bundle.day_ids.reserve(n);

    const double rho = regime.persistence;
    const double sigma = regime.volatility;
    const double innovation =
        regime.kind == SynthRegime::Kind::Momentum ? sigma * std::sqrt(1.0 - rho * rho) : sigma;

    double log_mid = std::log(100.0);
    double ar_state = regime.kind == SynthRegime::Kind::Momentum ? sigma * rng.normal() : 0.0;
    const int64_t rows_per_day = (n + days - 1) / days;

    for (int64_t i = 0; i < n; ++i) {
        const double mid = std::exp(log_mid);
        const int32_t day = static_cast<int32_t>(i / rows_per_day);
        const double tod = 0.1 * static_cast<double>(i % rows_per_day) + 0.01 * rng.uniform();

        LobRecord r;
        r.timestamp = tod;
        r.ask_prices.resize(levels);
        r.ask_volumes.resize(levels);
        r.bid_prices.resize(levels);
        r.bid_volumes.resize(levels);

        // Relative spread around 1-3 bps, always positive.
        const double rel_spread = 1.0e-4 * (1.0 + rng.exponential());
        double ask = mid * (1.0 + 0.5 * rel_spread);
        double bid = mid * (1.0 - 0.5 * rel_spread);
        for (int l = 0; l < levels; ++l) {
            r.ask_prices[l] = ask;
            r.bid_prices[l] = bid;
            r.ask_volumes[l] = std::exp(std::log(100.0) + 0.5 * rng.normal());
            r.bid_volumes[l] = std::exp(std::log(100.0) + 0.5 * rng.normal());
            const double gap = mid * 1.0e-4 * (0.5 + rng.uniform());
            ask += gap;
            bid -= gap;
        }

        OrderEvent e;
        e.timestamp = tod;
        e.order_id = i + 1;
        const double u = rng.uniform();
        if (u < 0.35) e.kind = EventKind::Submission;
        else if (u < 0.45) e.kind = EventKind::Cancellation;
        else if (u < 0.55) e.kind = EventKind::Deletion;
        else if (u < 0.90) e.kind = EventKind::ExecutionVisible;
        else e.kind = EventKind::ExecutionHidden;
        e.size = std::floor(std::exp(std::log(120.0) + 0.6 * rng.normal())) + 1.0;
        e.direction = rng.uniform() < 0.5 ? 1 : -1;
        e.price = e.direction > 0 ? r.bid_prices[0] : r.ask_prices[0];

        bundle.snapshots.push_back(std::move(r));
        bundle.events.push_back(e);
        bundle.day_ids.push_back(day);

        // Advance the mid-price after emitting the snapshot.
        double step;
        if (regime.kind == SynthRegime::Kind::Momentum) {
            step = regime.drift + ar_state;
            ar_state = rho * ar_state + innovation * rng.normal();
        } else {
            step = innovation * rng.normal();
        }
        log_mid += step;
    }

    std::ostringstream params;
    params << "{\"seed\":" << seed << ",\"n\":" << n << ",\"regime\":\""
           << (regime.kind == SynthRegime::Kind::Momentum ? "momentum" : "random-walk")
           << "\",\"drift\":" << regime.drift << ",\"persistence\":" << regime.persistence
           << ",\"volatility\":" << regime.volatility << ",\"levels\":" << levels
           << ",\"days\":" << days << "}";
    bundle.synth_params = params.str();

    bundle.refresh_diagnostics();
    return bundle;
}

} // namespace lobtrend
