#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "lobtrend/dataset.hpp"
#include "lobtrend/parsers.hpp"
#include "lobtrend/synth.hpp"

using namespace lobtrend;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("lobtrend_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string file(const std::string& name, const std::string& content) const {
        auto p = (path / name).string();
        std::ofstream out(p);
        out << content;
        return p;
    }
    std::string sub(const std::string& name) const { return (path / name).string(); }
};

} // namespace

TEST_CASE("parse_snapshot_message_pair: prices scale from ten-thousandths") {
    TempDir tmp;
    auto book = tmp.file("book.csv", "1012300,100,1011100,80\n");
    auto msg = tmp.file("msg.csv", "34200.5,4,17,200,1012300,-1\n");
    auto bundle = parse_snapshot_message_pair(book, msg, 1);
    REQUIRE(bundle.size() == 1);
    const auto& r = bundle.snapshots[0];
    CHECK(r.ask_prices[0] == doctest::Approx(101.23));
    CHECK(r.ask_volumes[0] == 100.0);
    CHECK(r.bid_prices[0] == doctest::Approx(101.11));
    CHECK(r.bid_volumes[0] == 80.0);
    CHECK(r.timestamp == doctest::Approx(34200.5));

    REQUIRE(bundle.has_events());
    const auto& e = bundle.events[0];
    CHECK(e.timestamp == doctest::Approx(34200.5));
    CHECK(e.kind == EventKind::ExecutionVisible);
    CHECK(e.order_id == 17);
    CHECK(e.size == 200.0);
    CHECK(e.price == doctest::Approx(101.23));
    CHECK(e.direction == -1);
    CHECK(!bundle.degraded);
}

TEST_CASE("parse_snapshot_message_pair: row-count mismatch") {
    TempDir tmp;
    auto book = tmp.file("book.csv", "1012300,100,1011100,80\n1012400,90,1011200,70\n"
                                     "1012500,95,1011300,60\n");
    auto msg = tmp.file("msg.csv", "1,1,1,10,1012300,1\n2,1,2,10,1012300,1\n"
                                   "3,1,3,10,1012300,1\n4,1,4,10,1012300,1\n");
    CHECK_THROWS_WITH_AS(parse_snapshot_message_pair(book, msg, 1),
                         doctest::Contains("row-count mismatch"), FormatError);
}

TEST_CASE("parse_snapshot_message_pair: non-numeric field and strictness") {
    TempDir tmp;
    auto book_bad = tmp.file("b1.csv", "abc,100,1011100,80\n");
    auto msg = tmp.file("m1.csv", "1,1,1,10,1012300,1\n");
    CHECK_THROWS_AS(parse_snapshot_message_pair(book_bad, msg, 1), FormatError);

    // Crossed book: non-fatal by default, fatal under strict.
    auto book_crossed = tmp.file("b2.csv", "1011100,100,1012300,80\n");
    auto bundle = parse_snapshot_message_pair(book_crossed, msg, 1);
    CHECK(bundle.degraded);
    CHECK(bundle.snapshot_diags.crossed_book == 1);
    CHECK_THROWS_AS(parse_snapshot_message_pair(book_crossed, msg, 1, /*strict=*/true),
                    ValidationError);
}

TEST_CASE("parse_fi2010_matrix") {
    TempDir tmp;
    const int cols = 5;
    std::string content;
    for (int row = 0; row < 149; ++row) {
        for (int c = 0; c < cols; ++c) {
            double v;
            if (row < 40) {
                // per level: ask_p, ask_v, bid_p, bid_v
                const int kind = row % 4;
                const int level = row / 4;
                switch (kind) {
                    case 0: v = 10.0 + 0.01 * level + 0.001 * c; break;
                    case 1: v = 100.0 + level; break;
                    case 2: v = 9.9 - 0.01 * level + 0.001 * c; break;
                    default: v = 90.0 + level; break;
                }
            } else if (row < 144) {
                v = 0.5 * row + c;
            } else {
                v = 1 + ((row + c) % 3); // labels in {1,2,3}
            }
            content += (c ? " " : "") + std::to_string(v);
        }
        content += "\n";
    }
    auto path = tmp.file("fi.txt", content);
    auto bundle = parse_fi2010_matrix(path);
    CHECK(bundle.size() == cols);
    CHECK(bundle.levels() == 10);
    REQUIRE(bundle.extra_features.size() == cols);
    CHECK(bundle.extra_features[0].size() == 104);
    REQUIRE(bundle.provided_labels.size() == 5);
    for (int h : {10, 20, 30, 50, 100})
        CHECK(bundle.provided_labels.at(h).size() == cols);

    // Row 145 (index 144) holds h=10 labels: value (144+c)%3+1.
    // Column 1 -> value (145)%3+1 = 2 -> stable.
    CHECK(bundle.provided_labels.at(10)[1] == TrendLabel::Stable);
    // Value mapping: 1 -> U, 3 -> D.
    CHECK(bundle.provided_labels.at(10)[0] == TrendLabel::Up);    // (144+0)%3+1 = 1
    CHECK(bundle.provided_labels.at(10)[2] == TrendLabel::Down);  // (144+2)%3+1 = 3
}

TEST_CASE("parse_fi2010_matrix rejects wrong row count and bad labels") {
    TempDir tmp;
    std::string content;
    for (int row = 0; row < 148; ++row) content += "1.0\n";
    auto path = tmp.file("short.txt", content);
    CHECK_THROWS_WITH_AS(parse_fi2010_matrix(path), doctest::Contains("149"), FormatError);

    std::string bad;
    for (int row = 0; row < 149; ++row) bad += row < 144 ? "1.0\n" : "7\n";
    auto path2 = tmp.file("badlabel.txt", bad);
    CHECK_THROWS_WITH_AS(parse_fi2010_matrix(path2), doctest::Contains("outside {1,2,3}"),
                         FormatError);
}

TEST_CASE("parse_generic_snapshots") {
    TempDir tmp;
    auto path = tmp.file("generic.csv",
                         "timestamp,ask_p_1,ask_v_1,bid_p_1,bid_v_1\n"
                         "0.0,100.1,5,99.9,6\n"
                         "0.5,100.2,5,100.0,6\n");
    auto bundle = parse_generic_snapshots(path, 1);
    REQUIRE(bundle.size() == 2);
    CHECK(bundle.snapshots[1].timestamp == doctest::Approx(0.5));
    CHECK(bundle.snapshots[1].bid_prices[0] == doctest::Approx(100.0));
    CHECK(!bundle.has_events());
    CHECK(!bundle.degraded);

    SUBCASE("missing column") {
        auto bad = tmp.file("missing.csv", "timestamp,ask_p_1,ask_v_1,bid_p_1\n0,1,1,1\n");
        CHECK_THROWS_WITH_AS(parse_generic_snapshots(bad, 1),
                             doctest::Contains("missing column"), FormatError);
    }
    SUBCASE("non-monotone timestamps only degrade") {
        auto warn = tmp.file("warn.csv",
                             "timestamp,ask_p_1,ask_v_1,bid_p_1,bid_v_1\n"
                             "1.0,100.1,5,99.9,6\n"
                             "0.5,100.2,5,100.0,6\n");
        auto b = parse_generic_snapshots(warn, 1);
        CHECK(b.degraded);
        CHECK(b.size() == 2);
    }
}

TEST_CASE("canonical bundle round-trip is bit-exact") {
    TempDir tmp;
    auto bundle = synth_lob(123, 64, SynthRegime::momentum(1e-5, 0.5), 4, 2);
    // attach some provided labels to cover that path
    bundle.provided_labels[10] = std::vector<TrendLabel>(64, TrendLabel::Stable);
    bundle.provided_labels[10][3] = TrendLabel::Up;
    write_bundle(tmp.sub("out"), bundle);
    auto back = read_bundle(tmp.sub("out"));

    REQUIRE(back.size() == bundle.size());
    REQUIRE(back.levels() == bundle.levels());
    for (int64_t i = 0; i < bundle.size(); ++i) {
        const auto& a = bundle.snapshots[static_cast<size_t>(i)];
        const auto& b = back.snapshots[static_cast<size_t>(i)];
        CHECK(a.timestamp == b.timestamp);
        for (int l = 0; l < bundle.levels(); ++l) {
            CHECK(a.ask_prices[l] == b.ask_prices[l]);
            CHECK(a.ask_volumes[l] == b.ask_volumes[l]);
            CHECK(a.bid_prices[l] == b.bid_prices[l]);
            CHECK(a.bid_volumes[l] == b.bid_volumes[l]);
        }
        const auto& ea = bundle.events[static_cast<size_t>(i)];
        const auto& eb = back.events[static_cast<size_t>(i)];
        CHECK(ea.timestamp == eb.timestamp);
        CHECK(ea.kind == eb.kind);
        CHECK(ea.size == eb.size);
        CHECK(ea.price == eb.price);
        CHECK(ea.direction == eb.direction);
    }
    CHECK(back.day_ids == bundle.day_ids);
    CHECK(back.provided_labels.at(10) == bundle.provided_labels.at(10));
    CHECK(!back.degraded);
}

TEST_CASE("synth_lob determinism and validity") {
    auto a = synth_lob(1, 3, SynthRegime::random_walk());
    auto b = synth_lob(1, 3, SynthRegime::random_walk());
    REQUIRE(a.size() == 3);
    for (int64_t i = 0; i < 3; ++i) {
        CHECK(a.snapshots[static_cast<size_t>(i)].ask_prices ==
              b.snapshots[static_cast<size_t>(i)].ask_prices);
        CHECK(a.snapshots[static_cast<size_t>(i)].bid_volumes ==
              b.snapshots[static_cast<size_t>(i)].bid_volumes);
        CHECK(a.events[static_cast<size_t>(i)].size == b.events[static_cast<size_t>(i)].size);
    }
    auto c = synth_lob(2, 3, SynthRegime::random_walk());
    CHECK(a.snapshots[0].ask_prices != c.snapshots[0].ask_prices);

    auto big = synth_lob(7, 500, SynthRegime::momentum(0.0, 0.8));
    CHECK(validate_series(big.snapshots).clean());
    CHECK(validate_events(big.events) == 0);
    CHECK(!big.degraded);
}

TEST_CASE("synth_lob momentum embeds lag-1 return autocorrelation") {
    const int64_t n = 10000;
    auto bundle = synth_lob(99, n, SynthRegime::momentum(0.0, 0.9));
    auto mids = mid_price_series(bundle.snapshots);
    // Independent statistics routine: plain sample autocorrelation.
    std::vector<double> rets;
    for (int64_t i = 0; i + 1 < n; ++i)
        rets.push_back(mids.values[static_cast<size_t>(i + 1)] /
                           mids.values[static_cast<size_t>(i)] -
                       1.0);
    double mean = 0.0;
    for (double r : rets) mean += r;
    mean /= static_cast<double>(rets.size());
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i + 1 < rets.size(); ++i)
        num += (rets[i] - mean) * (rets[i + 1] - mean);
    for (double r : rets) den += (r - mean) * (r - mean);
    CHECK(num / den > 0.5);
}

TEST_CASE("split_chronological fractions") {
    auto bundle = synth_lob(5, 100, SynthRegime::random_walk(), 2);
    SplitSpec spec;
    spec.mode = SplitSpec::Mode::ByFraction;
    spec.train_frac = 0.8;
    spec.val_frac = 0.1;
    spec.test_frac = 0.1;
    auto parts = split_chronological(bundle, spec);
    CHECK(parts.train.size() == 80);
    CHECK(parts.val.size() == 10);
    CHECK(parts.test.size() == 10);
    // contiguous and ordered
    CHECK(parts.train.snapshots.back().timestamp <= parts.val.snapshots.front().timestamp);

    SplitSpec small;
    small.train_frac = 0.5;
    small.val_frac = 0.2;
    small.test_frac = 0.3;
    auto b10 = synth_lob(5, 10, SynthRegime::random_walk(), 2);
    auto p10 = split_chronological(b10, small);
    CHECK(p10.train.size() == 5);
    CHECK(p10.val.size() == 2);
    CHECK(p10.test.size() == 3);
}

TEST_CASE("split_chronological by day") {
    auto bundle = synth_lob(5, 90, SynthRegime::random_walk(), 2, 3);
    SplitSpec spec;
    spec.mode = SplitSpec::Mode::ByDayCount;
    spec.train_days = 1;
    spec.val_days = 1;
    spec.test_days = 1;
    auto parts = split_chronological(bundle, spec);
    CHECK(parts.train.size() == 30);
    CHECK(parts.val.size() == 30);
    CHECK(parts.test.size() == 30);
    for (auto d : parts.train.day_ids) CHECK(d == 0);
    for (auto d : parts.val.day_ids) CHECK(d == 1);
    for (auto d : parts.test.day_ids) CHECK(d == 2);

    SUBCASE("too many days requested") {
        spec.test_days = 2;
        CHECK_THROWS_AS(split_chronological(bundle, spec), DataError);
    }
}

TEST_CASE("split_chronological rejects empty partitions") {
    auto bundle = synth_lob(5, 10, SynthRegime::random_walk(), 2);
    SplitSpec spec;
    spec.train_frac = 0.98;
    spec.val_frac = 0.01;
    spec.test_frac = 0.01;
    CHECK_THROWS_AS(split_chronological(bundle, spec), DataError);
}
