#include "lobtrend/sampling.hpp"

#include <cmath>

#include "lobtrend/errors.hpp"

namespace lobtrend {

DatasetBundle sample_by_events(const DatasetBundle& bundle, int64_t n) {
    if (n < 1) throw ConfigError("sample_by_events: n must be >= 1");
    std::vector<int64_t> keep;
    keep.reserve(static_cast<size_t>(bundle.size() / n) + 1);
    for (int64_t i = n - 1; i < bundle.size(); i += n) keep.push_back(i);
    return take_rows(bundle, keep);
}

DatasetBundle sample_by_time(const DatasetBundle& bundle, double dt) {
    if (dt <= 0.0) throw ConfigError("sample_by_time: dt must be > 0");
    const int64_t n = bundle.size();
    std::vector<int64_t> keep;
    if (n > 0) {
        const double t0 = bundle.snapshots.front().timestamp;
        const double t_last = bundle.snapshots.back().timestamp;
        int64_t cursor = 0;
        int64_t last_emitted = -1;
        for (int64_t k = 1;; ++k) {
            const double grid = t0 + static_cast<double>(k) * dt;
            while (cursor + 1 < n && bundle.snapshots[cursor + 1].timestamp <= grid) ++cursor;
            if (bundle.snapshots[cursor].timestamp <= grid && cursor > last_emitted) {
                keep.push_back(cursor);
                last_emitted = cursor;
            }
            if (grid > t_last) break;
            if (cursor + 1 < n) {
                // Fast-forward past grid intervals that cannot contain a new
                // row; the advance loop above re-checks, so an off-by-one
                // from the division only costs one extra iteration.
                const double next_ts = bundle.snapshots[cursor + 1].timestamp;
                const auto jump = static_cast<int64_t>(std::floor((next_ts - t0) / dt)) - 1;
                if (jump > k) k = jump;
            }
        }
    }
    return take_rows(bundle, keep);
}

DatasetBundle sample_by_volume(const DatasetBundle& bundle, double v) {
    if (v < 1.0) throw ConfigError("sample_by_volume: v must be >= 1");
    if (!bundle.has_events())
        throw DataError("sample_by_volume: bundle has no event stream");
    if (bundle.events.size() != bundle.snapshots.size())
        throw DataError("sample_by_volume: events not aligned with snapshots");

    std::vector<int64_t> keep;
    double counter = 0.0;
    for (int64_t i = 0; i < bundle.size(); ++i) {
        const auto& e = bundle.events[static_cast<size_t>(i)];
        if (!is_execution(e.kind)) continue;
        counter += e.size;
        if (counter >= v) {
            keep.push_back(i);
            counter = std::fmod(counter, v);
        }
    }
    return take_rows(bundle, keep);
}

DatasetBundle apply_sampling(const DatasetBundle& bundle, const SamplingSpec& spec) {
    switch (spec.mode) {
        case SamplingSpec::Mode::EveryNEvents:
            return sample_by_events(bundle, static_cast<int64_t>(spec.param));
        case SamplingSpec::Mode::EveryDtSeconds:
            return sample_by_time(bundle, spec.param);
        case SamplingSpec::Mode::EveryVShares:
            return sample_by_volume(bundle, spec.param);
    }
    throw ConfigError("unknown sampling mode");
}

} // namespace lobtrend
