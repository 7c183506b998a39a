#include "lobtrend/features.hpp"

#include <string>

#include "lobtrend/errors.hpp"

namespace lobtrend {

FeatureSource feature_source_from_name(const std::string& name) {
    if (name == "lob") return FeatureSource::LobOnly;
    if (name == "lob+handcrafted") return FeatureSource::LobHandcrafted;
    if (name == "lob+orders") return FeatureSource::LobOrders;
    throw ConfigError("unknown feature source: " + name);
}

std::string feature_source_name(FeatureSource s) {
    switch (s) {
        case FeatureSource::LobOnly: return "lob";
        case FeatureSource::LobHandcrafted: return "lob+handcrafted";
        case FeatureSource::LobOrders: return "lob+orders";
    }
    return "?";
}

int64_t feature_width(const DatasetBundle& bundle, const FeatureAssembly& spec) {
    const int64_t base = 4 * bundle.levels();
    switch (spec.source) {
        case FeatureSource::LobOnly:
            return base;
        case FeatureSource::LobHandcrafted:
            if (bundle.extra_features.empty())
                throw DataError("feature assembly lob+handcrafted: bundle has no extra features");
            return base + static_cast<int64_t>(bundle.extra_features.front().size());
        case FeatureSource::LobOrders:
            if (!bundle.has_events())
                throw DataError("feature assembly lob+orders: bundle has no event stream");
            return base + 6;
    }
    throw ConfigError("unknown feature source");
}

namespace {

// Order-event encoding: 4-way kind one-hot (submission, cancel/delete,
// execution, halt), signed size, and price relative to the row's mid.
void append_order_features(const OrderEvent& e, double mid, std::vector<double>& out) {
    double onehot[4] = {0, 0, 0, 0};
    switch (e.kind) {
        case EventKind::Submission: onehot[0] = 1; break;
        case EventKind::Cancellation:
        case EventKind::Deletion: onehot[1] = 1; break;
        case EventKind::ExecutionVisible:
        case EventKind::ExecutionHidden: onehot[2] = 1; break;
        case EventKind::Halt: onehot[3] = 1; break;
    }
    for (double v : onehot) out.push_back(v);
    out.push_back(static_cast<double>(e.direction) * e.size);
    out.push_back(e.kind == EventKind::Halt || e.price <= 0.0 ? 0.0
                                                              : (e.price - mid) / mid);
}

} // namespace

WindowSet assemble_features(const DatasetBundle& bundle, const LabeledSeries& labeled,
                            const FeatureAssembly& spec, int64_t T) {
    if (T < 1) throw ConfigError("assemble_features: window length must be >= 1");
    const int64_t n = bundle.size();
    const int64_t F = feature_width(bundle, spec);
    const int levels = bundle.levels();

    // Materialize per-snapshot feature rows once, then gather windows.
    std::vector<double> rows;
    rows.reserve(static_cast<size_t>(n * F));
    for (int64_t i = 0; i < n; ++i) {
        const auto& r = bundle.snapshots[static_cast<size_t>(i)];
        std::vector<double> row;
        row.reserve(static_cast<size_t>(F));
        for (int l = 0; l < levels; ++l) {
            row.push_back(r.ask_prices[l]);
            row.push_back(r.ask_volumes[l]);
            row.push_back(r.bid_prices[l]);
            row.push_back(r.bid_volumes[l]);
        }
        if (spec.source == FeatureSource::LobHandcrafted) {
            for (double v : bundle.extra_features[static_cast<size_t>(i)]) row.push_back(v);
        } else if (spec.source == FeatureSource::LobOrders) {
            append_order_features(bundle.events[static_cast<size_t>(i)], mid_price(r), row);
        }
        if (static_cast<int64_t>(row.size()) != F)
            throw DataError("feature row width drifted at index " + std::to_string(i));
        rows.insert(rows.end(), row.begin(), row.end());
    }

    WindowSet ws;
    ws.window = T;
    ws.features = F;
    for (int64_t j = 0; j < labeled.size(); ++j) {
        const int64_t t = labeled.first_index + j;
        if (t < T - 1) continue;
        if (t >= n) throw DataError("labeled index exceeds snapshot series");
        const int64_t start = t - T + 1;
        ws.data.insert(ws.data.end(), rows.begin() + start * F, rows.begin() + (t + 1) * F);
        ws.labels.push_back(to_int(labeled.labels[static_cast<size_t>(j)]));
        ws.anchors.push_back(t);
        ++ws.count;
    }
    if (ws.count == 0)
        throw DataError("series too short: no window of length " + std::to_string(T) +
                        " fits the labeled range");
    return ws;
}

} // namespace lobtrend
