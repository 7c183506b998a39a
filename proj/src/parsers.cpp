#include "lobtrend/parsers.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <unordered_map>

#include "lobtrend/csv.hpp"
#include "lobtrend/errors.hpp"

namespace lobtrend {

namespace {

constexpr double kLobsterPriceScale = 1.0e-4;

} // namespace

DatasetBundle parse_snapshot_message_pair(const std::string& orderbook_file,
                                          const std::string& message_file,
                                          int levels, bool strict) {
    if (levels < 1) throw ConfigError("levels must be >= 1");
    auto book_lines = csv::read_lines(orderbook_file);
    auto msg_lines = csv::read_lines(message_file);
    if (book_lines.size() != msg_lines.size())
        throw FormatError("row-count mismatch: " + orderbook_file + " has " +
                          std::to_string(book_lines.size()) + " rows, " + message_file +
                          " has " + std::to_string(msg_lines.size()));

    DatasetBundle bundle;
    bundle.origin = "lobster";
    bundle.price_scale = kLobsterPriceScale;
    bundle.snapshots.reserve(book_lines.size());
    bundle.events.reserve(msg_lines.size());

    const size_t book_cols = 4 * static_cast<size_t>(levels);
    for (size_t i = 0; i < book_lines.size(); ++i) {
        const std::string bctx = orderbook_file + " row " + std::to_string(i + 1);
        auto bf = csv::split_line(book_lines[i]);
        if (bf.size() != book_cols)
            throw FormatError(bctx + ": expected " + std::to_string(book_cols) +
                              " columns, got " + std::to_string(bf.size()));

        const std::string mctx = message_file + " row " + std::to_string(i + 1);
        auto mf = csv::split_line(msg_lines[i]);
        if (mf.size() != 6) throw FormatError(mctx + ": expected 6 columns");

        OrderEvent e;
        e.timestamp = csv::parse_number(mf[0], mctx);
        e.kind = event_kind_from_code(static_cast<int>(csv::parse_integer(mf[1], mctx)));
        e.order_id = csv::parse_integer(mf[2], mctx);
        e.size = csv::parse_number(mf[3], mctx);
        e.price = csv::parse_number(mf[4], mctx) * kLobsterPriceScale;
        e.direction = static_cast<int>(csv::parse_integer(mf[5], mctx));

        LobRecord r;
        r.timestamp = e.timestamp;
        r.ask_prices.resize(levels);
        r.ask_volumes.resize(levels);
        r.bid_prices.resize(levels);
        r.bid_volumes.resize(levels);
        for (int l = 0; l < levels; ++l) {
            r.ask_prices[l] = csv::parse_number(bf[4 * l + 0], bctx) * kLobsterPriceScale;
            r.ask_volumes[l] = csv::parse_number(bf[4 * l + 1], bctx);
            r.bid_prices[l] = csv::parse_number(bf[4 * l + 2], bctx) * kLobsterPriceScale;
            r.bid_volumes[l] = csv::parse_number(bf[4 * l + 3], bctx);
        }
        bundle.snapshots.push_back(std::move(r));
        bundle.events.push_back(e);
    }

    bundle.day_ids.assign(bundle.snapshots.size(), 0);
    bundle.refresh_diagnostics();
    if (strict && bundle.degraded) {
        std::string detail = bundle.snapshot_diags.notes.empty()
                                 ? "event stream violations"
                                 : bundle.snapshot_diags.notes.front();
        throw ValidationError("strict parse failed for " + orderbook_file + ": " + detail);
    }
    return bundle;
}

DatasetBundle parse_fi2010_matrix(const std::string& file) {
    auto lines = csv::read_lines(file);
    constexpr size_t kRows = 149;
    constexpr int kLevels = 10;
    constexpr size_t kLobRows = 40;
    constexpr size_t kHandcrafted = 104;
    static const int kHorizons[5] = {10, 20, 30, 50, 100};

    if (lines.size() != kRows)
        throw FormatError(file + ": expected 149 rows, got " + std::to_string(lines.size()));

    // Rows may be comma- or whitespace-separated.
    std::vector<std::vector<double>> rows(kRows);
    size_t cols = 0;
    for (size_t i = 0; i < kRows; ++i) {
        const std::string ctx = file + " row " + std::to_string(i + 1);
        std::vector<double>& row = rows[i];
        const std::string& line = lines[i];
        size_t pos = 0;
        while (pos < line.size()) {
            while (pos < line.size() &&
                   (line[pos] == ',' || std::isspace(static_cast<unsigned char>(line[pos]))))
                ++pos;
            if (pos >= line.size()) break;
            size_t end = pos;
            while (end < line.size() && line[end] != ',' &&
                   !std::isspace(static_cast<unsigned char>(line[end])))
                ++end;
            row.push_back(csv::parse_number(line.substr(pos, end - pos), ctx));
            pos = end;
        }
        if (i == 0) {
            cols = row.size();
            if (cols == 0) throw FormatError(ctx + ": empty row");
        } else if (row.size() != cols) {
            throw FormatError(ctx + ": expected " + std::to_string(cols) + " columns, got " +
                              std::to_string(row.size()));
        }
    }

    DatasetBundle bundle;
    bundle.origin = "fi2010";
    bundle.snapshots.reserve(cols);
    bundle.extra_features.reserve(cols);
    for (int h : kHorizons) bundle.provided_labels[h].reserve(cols);

    for (size_t c = 0; c < cols; ++c) {
        LobRecord r;
        r.timestamp = static_cast<double>(c);
        r.ask_prices.resize(kLevels);
        r.ask_volumes.resize(kLevels);
        r.bid_prices.resize(kLevels);
        r.bid_volumes.resize(kLevels);
        for (int l = 0; l < kLevels; ++l) {
            r.ask_prices[l] = rows[4 * l + 0][c];
            r.ask_volumes[l] = rows[4 * l + 1][c];
            r.bid_prices[l] = rows[4 * l + 2][c];
            r.bid_volumes[l] = rows[4 * l + 3][c];
        }
        bundle.snapshots.push_back(std::move(r));

        std::vector<double> extra(kHandcrafted);
        for (size_t k = 0; k < kHandcrafted; ++k) extra[k] = rows[kLobRows + k][c];
        bundle.extra_features.push_back(std::move(extra));

        for (int hi = 0; hi < 5; ++hi) {
            double raw = rows[kLobRows + kHandcrafted + static_cast<size_t>(hi)][c];
            int v = static_cast<int>(raw);
            TrendLabel label;
            switch (v) {
                case 1: label = TrendLabel::Up; break;
                case 2: label = TrendLabel::Stable; break;
                case 3: label = TrendLabel::Down; break;
                default:
                    throw FormatError(file + ": label value " + std::to_string(raw) +
                                      " outside {1,2,3} at sample " + std::to_string(c + 1));
            }
            bundle.provided_labels[kHorizons[hi]].push_back(label);
        }
    }

    bundle.day_ids.assign(bundle.snapshots.size(), 0);
    bundle.refresh_diagnostics();
    return bundle;
}

DatasetBundle parse_generic_snapshots(const std::string& file, int levels) {
    if (levels < 1) throw ConfigError("levels must be >= 1");
    auto lines = csv::read_lines(file);
    if (lines.empty()) throw FormatError(file + ": empty file");

    auto header = csv::split_line(lines[0]);
    std::unordered_map<std::string, size_t> col;
    for (size_t i = 0; i < header.size(); ++i) {
        std::string name = header[i];
        name.erase(std::remove_if(name.begin(), name.end(),
                                  [](unsigned char ch) { return std::isspace(ch); }),
                   name.end());
        col[name] = i;
    }
    auto require = [&](const std::string& name) {
        auto it = col.find(name);
        if (it == col.end())
            throw FormatError(file + ": missing column '" + name + "'");
        return it->second;
    };

    const size_t ts_col = require("timestamp");
    const bool has_day = col.count("day") > 0;
    std::vector<std::array<size_t, 4>> level_cols(levels);
    for (int l = 1; l <= levels; ++l) {
        level_cols[l - 1] = {require("ask_p_" + std::to_string(l)),
                             require("ask_v_" + std::to_string(l)),
                             require("bid_p_" + std::to_string(l)),
                             require("bid_v_" + std::to_string(l))};
    }

    DatasetBundle bundle;
    bundle.origin = "generic";
    bundle.snapshots.reserve(lines.size() - 1);
    for (size_t i = 1; i < lines.size(); ++i) {
        const std::string ctx = file + " row " + std::to_string(i + 1);
        auto fields = csv::split_line(lines[i]);
        if (fields.size() < header.size())
            throw FormatError(ctx + ": expected " + std::to_string(header.size()) + " fields");
        LobRecord r;
        r.timestamp = csv::parse_number(fields[ts_col], ctx);
        r.ask_prices.resize(levels);
        r.ask_volumes.resize(levels);
        r.bid_prices.resize(levels);
        r.bid_volumes.resize(levels);
        for (int l = 0; l < levels; ++l) {
            r.ask_prices[l] = csv::parse_number(fields[level_cols[l][0]], ctx);
            r.ask_volumes[l] = csv::parse_number(fields[level_cols[l][1]], ctx);
            r.bid_prices[l] = csv::parse_number(fields[level_cols[l][2]], ctx);
            r.bid_volumes[l] = csv::parse_number(fields[level_cols[l][3]], ctx);
        }
        if (has_day)
            bundle.day_ids.push_back(
                static_cast<int32_t>(csv::parse_integer(fields[col["day"]], ctx)));
        bundle.snapshots.push_back(std::move(r));
    }
    if (!has_day) bundle.day_ids.assign(bundle.snapshots.size(), 0);

    bundle.refresh_diagnostics();
    // Non-monotone timestamps are a warning, not a failure.
    for (size_t i = 1; i < bundle.snapshots.size(); ++i) {
        if (bundle.snapshots[i].timestamp < bundle.snapshots[i - 1].timestamp) {
            bundle.degraded = true;
            break;
        }
    }
    return bundle;
}

} // namespace lobtrend
