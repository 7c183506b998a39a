#include "lobtrend/dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lobtrend/csv.hpp"
#include "lobtrend/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace lobtrend {

void DatasetBundle::refresh_diagnostics() {
    snapshot_diags = validate_series(snapshots);
    // Timestamps restart at session boundaries, so the monotonicity check
    // runs per day segment.
    event_violations = 0;
    if (!events.empty()) {
        if (day_ids.size() != events.size()) {
            event_violations = validate_events(events);
        } else {
            size_t start = 0;
            while (start < events.size()) {
                size_t end = start + 1;
                while (end < events.size() && day_ids[end] == day_ids[start]) ++end;
                std::vector<OrderEvent> segment(events.begin() + static_cast<ptrdiff_t>(start),
                                                events.begin() + static_cast<ptrdiff_t>(end));
                event_violations += validate_events(segment);
                start = end;
            }
        }
    }
    degraded = !snapshot_diags.clean() || event_violations > 0;
}

DatasetBundle slice_bundle(const DatasetBundle& bundle, int64_t from, int64_t to) {
    std::vector<int64_t> indices;
    indices.reserve(static_cast<size_t>(to - from));
    for (int64_t i = from; i < to; ++i) indices.push_back(i);
    return take_rows(bundle, indices);
}

DatasetBundle take_rows(const DatasetBundle& bundle, const std::vector<int64_t>& indices) {
    DatasetBundle out;
    out.price_scale = bundle.price_scale;
    out.origin = bundle.origin;
    out.synth_params = bundle.synth_params;
    out.snapshots.reserve(indices.size());
    for (int64_t i : indices) {
        if (i < 0 || i >= bundle.size())
            throw DataError("row index out of range: " + std::to_string(i));
        out.snapshots.push_back(bundle.snapshots[static_cast<size_t>(i)]);
    }
    if (bundle.has_events()) {
        out.events.reserve(indices.size());
        for (int64_t i : indices) out.events.push_back(bundle.events[static_cast<size_t>(i)]);
    }
    if (!bundle.extra_features.empty()) {
        out.extra_features.reserve(indices.size());
        for (int64_t i : indices)
            out.extra_features.push_back(bundle.extra_features[static_cast<size_t>(i)]);
    }
    for (const auto& [h, labels] : bundle.provided_labels) {
        std::vector<TrendLabel> sub;
        sub.reserve(indices.size());
        for (int64_t i : indices) sub.push_back(labels[static_cast<size_t>(i)]);
        out.provided_labels[h] = std::move(sub);
    }
    if (!bundle.day_ids.empty()) {
        out.day_ids.reserve(indices.size());
        for (int64_t i : indices) out.day_ids.push_back(bundle.day_ids[static_cast<size_t>(i)]);
    }
    out.refresh_diagnostics();
    return out;
}

SplitBundles split_chronological(const DatasetBundle& bundle, const SplitSpec& spec) {
    const int64_t n = bundle.size();
    if (n == 0) throw DataError("cannot split an empty bundle");

    int64_t train_end = 0, val_end = 0, test_end = 0;
    if (spec.mode == SplitSpec::Mode::ByFraction) {
        if (spec.train_frac <= 0.0 || spec.val_frac <= 0.0 || spec.test_frac <= 0.0)
            throw ConfigError("split fractions must be positive");
        if (spec.train_frac + spec.val_frac + spec.test_frac > 1.0 + 1e-9)
            throw ConfigError("split fractions exceed 1");
        train_end = static_cast<int64_t>(spec.train_frac * static_cast<double>(n) + 0.5);
        val_end = train_end + static_cast<int64_t>(spec.val_frac * static_cast<double>(n) + 0.5);
        test_end = val_end + static_cast<int64_t>(spec.test_frac * static_cast<double>(n) + 0.5);
        test_end = std::min(test_end, n);
    } else {
        if (bundle.day_ids.empty())
            throw DataError("day-count split requested but bundle has no session ids");
        if (spec.train_days <= 0 || spec.val_days <= 0 || spec.test_days <= 0)
            throw ConfigError("split day counts must be positive");
        std::vector<int32_t> days;
        for (int32_t d : bundle.day_ids)
            if (days.empty() || days.back() != d) days.push_back(d);
        const int total = static_cast<int>(days.size());
        if (spec.train_days + spec.val_days + spec.test_days > total)
            throw DataError("split day counts exceed available sessions (" +
                            std::to_string(total) + ")");
        auto end_of_day_block = [&](int day_count) {
            int32_t last_day = days[static_cast<size_t>(day_count - 1)];
            int64_t i = 0;
            while (i < n && bundle.day_ids[static_cast<size_t>(i)] <= last_day) ++i;
            return i;
        };
        train_end = end_of_day_block(spec.train_days);
        val_end = end_of_day_block(spec.train_days + spec.val_days);
        test_end = end_of_day_block(spec.train_days + spec.val_days + spec.test_days);
    }

    if (train_end <= 0 || val_end <= train_end || test_end <= val_end)
        throw DataError("split produced an empty partition");

    SplitBundles out;
    out.train = slice_bundle(bundle, 0, train_end);
    out.val = slice_bundle(bundle, train_end, val_end);
    out.test = slice_bundle(bundle, val_end, test_end);
    return out;
}

namespace {

std::string snapshot_header(int levels) {
    std::string h = "timestamp,day";
    for (int l = 1; l <= levels; ++l) {
        h += ",ask_p_" + std::to_string(l) + ",ask_v_" + std::to_string(l) +
             ",bid_p_" + std::to_string(l) + ",bid_v_" + std::to_string(l);
    }
    return h;
}

} // namespace

void write_bundle(const std::string& dir, const DatasetBundle& bundle) {
    fs::create_directories(dir);
    const int levels = bundle.levels();

    {
        std::ostringstream out;
        out << snapshot_header(levels) << '\n';
        for (int64_t i = 0; i < bundle.size(); ++i) {
            const auto& r = bundle.snapshots[static_cast<size_t>(i)];
            out << csv::format_double(r.timestamp) << ','
                << (bundle.day_ids.empty() ? 0 : bundle.day_ids[static_cast<size_t>(i)]);
            for (int l = 0; l < levels; ++l) {
                out << ',' << csv::format_double(r.ask_prices[l])
                    << ',' << csv::format_double(r.ask_volumes[l])
                    << ',' << csv::format_double(r.bid_prices[l])
                    << ',' << csv::format_double(r.bid_volumes[l]);
            }
            out << '\n';
        }
        csv::write_text_file(dir + "/snapshots.csv", out.str());
    }

    if (bundle.has_events()) {
        std::ostringstream out;
        out << "timestamp,type,order_id,size,price,direction\n";
        for (const auto& e : bundle.events) {
            out << csv::format_double(e.timestamp) << ',' << static_cast<int>(e.kind) << ','
                << e.order_id << ',' << csv::format_double(e.size) << ','
                << csv::format_double(e.price) << ',' << e.direction << '\n';
        }
        csv::write_text_file(dir + "/events.csv", out.str());
    }

    if (!bundle.extra_features.empty()) {
        std::ostringstream out;
        const size_t cols = bundle.extra_features.front().size();
        for (size_t c = 0; c < cols; ++c) out << (c ? "," : "") << "x_" << (c + 1);
        out << '\n';
        for (const auto& row : bundle.extra_features) {
            for (size_t c = 0; c < cols; ++c)
                out << (c ? "," : "") << csv::format_double(row[c]);
            out << '\n';
        }
        csv::write_text_file(dir + "/extra_features.csv", out.str());
    }

    if (!bundle.provided_labels.empty()) {
        std::ostringstream out;
        bool first = true;
        for (const auto& [h, labels] : bundle.provided_labels) {
            (void)labels;
            out << (first ? "" : ",") << "h_" << h;
            first = false;
        }
        out << '\n';
        for (int64_t i = 0; i < bundle.size(); ++i) {
            first = true;
            for (const auto& [h, labels] : bundle.provided_labels) {
                (void)h;
                out << (first ? "" : ",") << to_int(labels[static_cast<size_t>(i)]);
                first = false;
            }
            out << '\n';
        }
        csv::write_text_file(dir + "/provided_labels.csv", out.str());
    }

    json meta;
    meta["levels"] = levels;
    meta["rows"] = bundle.size();
    meta["price_scale"] = bundle.price_scale;
    meta["origin"] = bundle.origin;
    meta["has_events"] = bundle.has_events();
    meta["extra_feature_count"] =
        bundle.extra_features.empty() ? 0 : bundle.extra_features.front().size();
    std::vector<int> horizons;
    for (const auto& [h, labels] : bundle.provided_labels) {
        (void)labels;
        horizons.push_back(h);
    }
    meta["label_horizons"] = horizons;
    meta["columns"] = snapshot_header(levels);
    if (!bundle.synth_params.empty()) meta["synth"] = json::parse(bundle.synth_params);
    csv::write_text_file(dir + "/meta.json", meta.dump(2) + "\n");
}

DatasetBundle read_bundle(const std::string& dir) {
    std::ifstream meta_in(dir + "/meta.json");
    if (!meta_in) throw DataError("missing bundle metadata: " + dir + "/meta.json");
    json meta = json::parse(meta_in);

    DatasetBundle bundle;
    bundle.price_scale = meta.value("price_scale", 1.0);
    bundle.origin = meta.value("origin", std::string());
    if (meta.contains("synth")) bundle.synth_params = meta["synth"].dump();
    const int levels = meta.at("levels").get<int>();

    auto lines = csv::read_lines(dir + "/snapshots.csv");
    if (lines.empty()) throw FormatError("empty snapshots file in " + dir);
    const size_t expected = 2 + 4 * static_cast<size_t>(levels);
    for (size_t i = 1; i < lines.size(); ++i) {
        auto fields = csv::split_line(lines[i]);
        if (fields.size() != expected)
            throw FormatError("snapshots.csv row " + std::to_string(i) + ": expected " +
                              std::to_string(expected) + " fields, got " +
                              std::to_string(fields.size()));
        const std::string ctx = "snapshots.csv row " + std::to_string(i);
        LobRecord r;
        r.timestamp = csv::parse_number(fields[0], ctx);
        bundle.day_ids.push_back(static_cast<int32_t>(csv::parse_integer(fields[1], ctx)));
        r.ask_prices.resize(levels);
        r.ask_volumes.resize(levels);
        r.bid_prices.resize(levels);
        r.bid_volumes.resize(levels);
        for (int l = 0; l < levels; ++l) {
            r.ask_prices[l] = csv::parse_number(fields[2 + 4 * l + 0], ctx);
            r.ask_volumes[l] = csv::parse_number(fields[2 + 4 * l + 1], ctx);
            r.bid_prices[l] = csv::parse_number(fields[2 + 4 * l + 2], ctx);
            r.bid_volumes[l] = csv::parse_number(fields[2 + 4 * l + 3], ctx);
        }
        bundle.snapshots.push_back(std::move(r));
    }

    if (meta.value("has_events", false)) {
        auto elines = csv::read_lines(dir + "/events.csv");
        for (size_t i = 1; i < elines.size(); ++i) {
            auto fields = csv::split_line(elines[i]);
            const std::string ctx = "events.csv row " + std::to_string(i);
            if (fields.size() != 6) throw FormatError(ctx + ": expected 6 fields");
            OrderEvent e;
            e.timestamp = csv::parse_number(fields[0], ctx);
            e.kind = event_kind_from_code(static_cast<int>(csv::parse_integer(fields[1], ctx)));
            e.order_id = csv::parse_integer(fields[2], ctx);
            e.size = csv::parse_number(fields[3], ctx);
            e.price = csv::parse_number(fields[4], ctx);
            e.direction = static_cast<int>(csv::parse_integer(fields[5], ctx));
            bundle.events.push_back(e);
        }
        if (bundle.events.size() != bundle.snapshots.size())
            throw FormatError("events.csv row count does not match snapshots.csv in " + dir);
    }

    if (meta.value("extra_feature_count", 0) > 0) {
        auto xlines = csv::read_lines(dir + "/extra_features.csv");
        for (size_t i = 1; i < xlines.size(); ++i) {
            auto fields = csv::split_line(xlines[i]);
            std::vector<double> row(fields.size());
            for (size_t c = 0; c < fields.size(); ++c)
                row[c] = csv::parse_number(fields[c], "extra_features.csv row " + std::to_string(i));
            bundle.extra_features.push_back(std::move(row));
        }
        if (bundle.extra_features.size() != bundle.snapshots.size())
            throw FormatError("extra_features.csv row count mismatch in " + dir);
    }

    if (meta.contains("label_horizons") && !meta["label_horizons"].empty()) {
        auto horizons = meta["label_horizons"].get<std::vector<int>>();
        auto llines = csv::read_lines(dir + "/provided_labels.csv");
        for (int h : horizons)
            bundle.provided_labels[h].reserve(llines.size() - 1);
        for (size_t i = 1; i < llines.size(); ++i) {
            auto fields = csv::split_line(llines[i]);
            if (fields.size() != horizons.size())
                throw FormatError("provided_labels.csv row " + std::to_string(i) +
                                  ": field count mismatch");
            for (size_t c = 0; c < horizons.size(); ++c) {
                int v = static_cast<int>(csv::parse_integer(
                    fields[c], "provided_labels.csv row " + std::to_string(i)));
                bundle.provided_labels[horizons[c]].push_back(trend_from_int(v));
            }
        }
        for (int h : horizons)
            if (bundle.provided_labels[h].size() != bundle.snapshots.size())
                throw FormatError("provided_labels.csv row count mismatch in " + dir);
    }

    bundle.refresh_diagnostics();
    return bundle;
}

} // namespace lobtrend
