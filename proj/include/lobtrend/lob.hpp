#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lobtrend/errors.hpp"

namespace lobtrend {

// Ternary price trend. Integer encoding 0=D, 1=S, 2=U so that argmax index
// order matches the class order used everywhere (down < stable < up).
enum class TrendLabel : int { Down = 0, Stable = 1, Up = 2 };

inline int to_int(TrendLabel t) { return static_cast<int>(t); }
char to_char(TrendLabel t);
TrendLabel trend_from_int(int v);

enum class EventKind : int {
    Submission = 1,
    Cancellation = 2,
    Deletion = 3,
    ExecutionVisible = 4,
    ExecutionHidden = 5,
    Halt = 7,
};

EventKind event_kind_from_code(int code);
bool is_execution(EventKind k);

// One order-book snapshot: per-level ask/bid prices and volumes, level 1 = best.
// Prices in monetary units, volumes in shares, timestamp in seconds since
// session open (only ordering is semantically required).
struct LobRecord {
    std::vector<double> ask_prices;
    std::vector<double> ask_volumes;
    std::vector<double> bid_prices;
    std::vector<double> bid_volumes;
    double timestamp = 0.0;

    int levels() const { return static_cast<int>(ask_prices.size()); }
};

// One message-stream event, aligned with a snapshot row when both are present.
struct OrderEvent {
    double timestamp = 0.0;
    EventKind kind = EventKind::Submission;
    int64_t order_id = 0;
    double size = 0.0;
    double price = 0.0;
    int direction = 0; // +1 buy, -1 sell
};

// Mid-price per sampled index, aligned 1:1 with a snapshot series.
struct MidPriceSeries {
    std::vector<double> values;

    int64_t size() const { return static_cast<int64_t>(values.size()); }
};

// (best ask + best bid) / 2. Throws ValidationError naming the violated
// invariant if the top of book is unusable.
double mid_price(const LobRecord& record);

// (best ask - best bid) / mid_price, always > 0 for a valid record.
double relative_spread(const LobRecord& record);

MidPriceSeries mid_price_series(const std::vector<LobRecord>& records);

// Per-invariant violation counts for a snapshot series. Diagnostics, not
// failure: a clean series reports all-zero counts.
struct SeriesDiagnostics {
    int64_t crossed_book = 0;
    int64_t nonpositive_volume = 0;
    int64_t nonpositive_price = 0;
    int64_t bad_level_order = 0;
    int64_t level_count_mismatch = 0;
    std::vector<std::string> notes; // first few violations, "index N: kind"

    bool clean() const { return total() == 0; }
    int64_t total() const {
        return crossed_book + nonpositive_volume + nonpositive_price +
               bad_level_order + level_count_mismatch;
    }
};

SeriesDiagnostics validate_series(const std::vector<LobRecord>& records);

// Soft checks on an event stream: negative size, nonpositive price on
// non-halt events, decreasing timestamps. Returns the violation count.
int64_t validate_events(const std::vector<OrderEvent>& events);

} // namespace lobtrend
