#pragma once

#include <cstdint>

#include "lobtrend/dataset.hpp"

namespace lobtrend {

// Mid-price process for synthetic series. RandomWalk draws iid log returns;
// Momentum makes log returns an AR(1) process so that future returns
// correlate with trailing ones at the given persistence.
struct SynthRegime {
    enum class Kind { RandomWalk, Momentum };
    Kind kind = Kind::RandomWalk;
    double drift = 0.0;        // per-step log drift (momentum only)
    double persistence = 0.0;  // AR(1) coefficient on log returns
    double volatility = 5.0e-4; // marginal std of per-step log returns

    static SynthRegime random_walk() { return SynthRegime{}; }
    static SynthRegime momentum(double drift, double persistence) {
        SynthRegime r;
        r.kind = Kind::Momentum;
        r.drift = drift;
        r.persistence = persistence;
        return r;
    }
};

// Deterministic-for-seed synthetic bundle with snapshots, an aligned event
// stream, and strictly valid books. `days` spreads rows over that many
// session ids for day-mode splits.
DatasetBundle synth_lob(uint64_t seed, int64_t n, const SynthRegime& regime,
                        int levels = 10, int days = 1);

} // namespace lobtrend
