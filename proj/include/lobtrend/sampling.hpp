#pragma once

#include "lobtrend/dataset.hpp"

namespace lobtrend {

struct SamplingSpec {
    enum class Mode { EveryNEvents, EveryDtSeconds, EveryVShares };
    Mode mode = Mode::EveryNEvents;
    double param = 1.0; // n events / dt seconds / v shares

    static SamplingSpec events(int64_t n) { return {Mode::EveryNEvents, static_cast<double>(n)}; }
    static SamplingSpec time(double dt) { return {Mode::EveryDtSeconds, dt}; }
    static SamplingSpec volume(double v) { return {Mode::EveryVShares, v}; }
};

// Keeps every n-th row (indices n-1, 2n-1, ...).
DatasetBundle sample_by_events(const DatasetBundle& bundle, int64_t n);

// Emits the last row at or before each grid point t0 + k*dt (zero-order
// hold); grid intervals with no new row emit nothing.
DatasetBundle sample_by_time(const DatasetBundle& bundle, double dt);

// Emits the snapshot aligned to the event at which the cumulative executed
// share count reaches v, then carries the remainder (counter mod v). Only
// execution events count. Requires an event stream.
DatasetBundle sample_by_volume(const DatasetBundle& bundle, double v);

DatasetBundle apply_sampling(const DatasetBundle& bundle, const SamplingSpec& spec);

} // namespace lobtrend
