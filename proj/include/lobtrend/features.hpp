#pragma once

#include <cstdint>
#include <vector>

#include "lobtrend/dataset.hpp"
#include "lobtrend/labeling.hpp"

namespace lobtrend {

// What goes into each model input row besides the 4L raw book values:
// nothing, the dataset's auxiliary feature columns, or a 6-column encoding of
// the aligned order event.
enum class FeatureSource { LobOnly, LobHandcrafted, LobOrders };

struct FeatureAssembly {
    FeatureSource source = FeatureSource::LobOnly;
};

FeatureSource feature_source_from_name(const std::string& name);
std::string feature_source_name(FeatureSource s);

// Sliding windows of T consecutive snapshot rows ending at each labelable
// index, stored row-major as [count, window, features].
struct WindowSet {
    int64_t count = 0;
    int64_t window = 0;   // T
    int64_t features = 0; // F
    std::vector<double> data;
    std::vector<int> labels;     // 0=D, 1=S, 2=U
    std::vector<int64_t> anchors; // snapshot index each window ends at

    const double* window_at(int64_t i) const { return data.data() + i * window * features; }
};

// Per-row feature width for a bundle under the given assembly.
int64_t feature_width(const DatasetBundle& bundle, const FeatureAssembly& spec);

// Builds windows aligned with `labeled` (offsets are labeled.first_index).
// Windows that would reach before the first snapshot are dropped; throws
// DataError when nothing remains.
WindowSet assemble_features(const DatasetBundle& bundle, const LabeledSeries& labeled,
                            const FeatureAssembly& spec, int64_t T);

} // namespace lobtrend
