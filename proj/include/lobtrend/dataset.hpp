#pragma once

#include <map>
#include <string>
#include <vector>

#include "lobtrend/lob.hpp"

namespace lobtrend {

// A parsed dataset: snapshot series plus optional aligned event stream,
// auxiliary feature columns, and externally provided labels per horizon.
struct DatasetBundle {
    std::vector<LobRecord> snapshots;
    std::vector<OrderEvent> events;                    // empty = none
    std::vector<std::vector<double>> extra_features;   // one row per snapshot
    std::map<int, std::vector<TrendLabel>> provided_labels; // horizon -> labels
    std::vector<int32_t> day_ids;                      // empty = single session

    SeriesDiagnostics snapshot_diags;
    int64_t event_violations = 0;
    bool degraded = false;

    // Metadata carried through canonical serialization.
    double price_scale = 1.0;
    std::string origin; // "lobster", "fi2010", "generic", "synth"
    std::string synth_params; // JSON fragment for synthetic bundles

    bool has_events() const { return !events.empty(); }
    int64_t size() const { return static_cast<int64_t>(snapshots.size()); }
    int levels() const { return snapshots.empty() ? 0 : snapshots.front().levels(); }

    void refresh_diagnostics();
};

struct SplitSpec {
    enum class Mode { ByFraction, ByDayCount };
    Mode mode = Mode::ByFraction;
    double train_frac = 0.8, val_frac = 0.1, test_frac = 0.1;
    int train_days = 0, val_days = 0, test_days = 0;
};

struct SplitBundles {
    DatasetBundle train, val, test;
};

// Selects rows [from, to) of every aligned part of the bundle.
DatasetBundle slice_bundle(const DatasetBundle& bundle, int64_t from, int64_t to);

// Gathers the given snapshot row indices (ascending) from every aligned part.
DatasetBundle take_rows(const DatasetBundle& bundle, const std::vector<int64_t>& indices);

// Contiguous, disjoint, time-ordered train/val/test partitions. Fraction mode
// splits by row count; day mode by distinct session ids. Throws DataError on
// an empty partition. Label windows never span partitions because each
// partition is labeled independently downstream.
SplitBundles split_chronological(const DatasetBundle& bundle, const SplitSpec& spec);

// Canonical on-disk format: one CSV per bundle part plus a JSON sidecar.
void write_bundle(const std::string& dir, const DatasetBundle& bundle);
DatasetBundle read_bundle(const std::string& dir);

} // namespace lobtrend
