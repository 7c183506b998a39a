#include "lobtrend/lob.hpp"

namespace lobtrend {

char to_char(TrendLabel t) {
    switch (t) {
        case TrendLabel::Down: return 'D';
        case TrendLabel::Stable: return 'S';
        case TrendLabel::Up: return 'U';
    }
    return '?';
}

TrendLabel trend_from_int(int v) {
    if (v < 0 || v > 2) throw ValidationError("trend label code out of range: " + std::to_string(v));
    return static_cast<TrendLabel>(v);
}

EventKind event_kind_from_code(int code) {
    switch (code) {
        case 1: return EventKind::Submission;
        case 2: return EventKind::Cancellation;
        case 3: return EventKind::Deletion;
        case 4: return EventKind::ExecutionVisible;
        case 5: return EventKind::ExecutionHidden;
        case 7: return EventKind::Halt;
    }
    throw FormatError("unknown event type code: " + std::to_string(code));
}

bool is_execution(EventKind k) {
    return k == EventKind::ExecutionVisible || k == EventKind::ExecutionHidden;
}

double mid_price(const LobRecord& record) {
    if (record.ask_prices.empty() || record.bid_prices.empty())
        throw ValidationError("empty book: record has no levels");
    double ask = record.ask_prices.front();
    double bid = record.bid_prices.front();
    if (ask <= 0.0 || bid <= 0.0)
        throw ValidationError("nonpositive price at level 1");
    if (ask <= bid)
        throw ValidationError("crossed book: best ask <= best bid");
    return 0.5 * (ask + bid);
}

double relative_spread(const LobRecord& record) {
    double mid = mid_price(record);
    return (record.ask_prices.front() - record.bid_prices.front()) / mid;
}

MidPriceSeries mid_price_series(const std::vector<LobRecord>& records) {
    MidPriceSeries out;
    out.values.reserve(records.size());
    for (const auto& r : records) out.values.push_back(mid_price(r));
    return out;
}

namespace {

constexpr size_t kMaxNotes = 16;

void note(SeriesDiagnostics& d, int64_t index, const char* what) {
    if (d.notes.size() < kMaxNotes)
        d.notes.push_back("index " + std::to_string(index) + ": " + what);
}

} // namespace

SeriesDiagnostics validate_series(const std::vector<LobRecord>& records) {
    SeriesDiagnostics d;
    const int levels = records.empty() ? 0 : records.front().levels();
    for (size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        const auto idx = static_cast<int64_t>(i);
        if (r.levels() != levels ||
            static_cast<int>(r.ask_volumes.size()) != r.levels() ||
            static_cast<int>(r.bid_prices.size()) != r.levels() ||
            static_cast<int>(r.bid_volumes.size()) != r.levels()) {
            ++d.level_count_mismatch;
            note(d, idx, "level count mismatch");
            continue;
        }
        bool bad_price = false, bad_vol = false, bad_order = false;
        for (int l = 0; l < r.levels(); ++l) {
            if (r.ask_prices[l] <= 0.0 || r.bid_prices[l] <= 0.0) bad_price = true;
            if (r.ask_volumes[l] <= 0.0 || r.bid_volumes[l] <= 0.0) bad_vol = true;
            if (l > 0 && (r.ask_prices[l] <= r.ask_prices[l - 1] ||
                          r.bid_prices[l] >= r.bid_prices[l - 1]))
                bad_order = true;
        }
        if (bad_price) { ++d.nonpositive_price; note(d, idx, "nonpositive price"); }
        if (bad_vol) { ++d.nonpositive_volume; note(d, idx, "nonpositive volume"); }
        if (bad_order) { ++d.bad_level_order; note(d, idx, "level price order violated"); }
        if (r.levels() > 0 && r.ask_prices[0] <= r.bid_prices[0]) {
            ++d.crossed_book;
            note(d, idx, "crossed book");
        }
    }
    return d;
}

int64_t validate_events(const std::vector<OrderEvent>& events) {
    int64_t violations = 0;
    double prev_ts = -1.0e300;
    for (const auto& e : events) {
        if (e.size < 0.0) ++violations;
        if (e.kind != EventKind::Halt && e.price <= 0.0) ++violations;
        if (e.timestamp < prev_ts) ++violations;
        prev_ts = e.timestamp;
    }
    return violations;
}

} // namespace lobtrend
