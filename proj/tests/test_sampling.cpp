#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lobtrend/sampling.hpp"
#include "lobtrend/synth.hpp"

using namespace lobtrend;

namespace {

DatasetBundle hand_bundle(const std::vector<double>& timestamps,
                          const std::vector<std::pair<EventKind, double>>& events = {}) {
    DatasetBundle b;
    for (size_t i = 0; i < timestamps.size(); ++i) {
        LobRecord r;
        r.timestamp = timestamps[i];
        r.ask_prices = {100.0 + 0.001 * static_cast<double>(i)};
        r.bid_prices = {99.0};
        r.ask_volumes = {10.0};
        r.bid_volumes = {10.0};
        b.snapshots.push_back(std::move(r));
        if (!events.empty()) {
            OrderEvent e;
            e.timestamp = timestamps[i];
            e.kind = events[i].first;
            e.size = events[i].second;
            e.price = 100.0;
            e.direction = 1;
            e.order_id = static_cast<int64_t>(i);
            b.events.push_back(e);
        }
    }
    b.day_ids.assign(b.snapshots.size(), 0);
    b.refresh_diagnostics();
    return b;
}

std::vector<double> asks(const DatasetBundle& b) {
    std::vector<double> out;
    for (const auto& r : b.snapshots) out.push_back(r.ask_prices[0]);
    return out;
}

} // namespace

TEST_CASE("sample_by_events keeps every n-th row") {
    std::vector<double> ts;
    for (int i = 0; i < 10; ++i) ts.push_back(0.1 * i);
    auto b10 = hand_bundle(ts);
    auto out = sample_by_events(b10, 10);
    REQUIRE(out.size() == 1);
    CHECK(out.snapshots[0].timestamp == b10.snapshots[9].timestamp);

    SUBCASE("n = 1 is the identity") {
        auto same = sample_by_events(b10, 1);
        CHECK(asks(same) == asks(b10));
    }
    SUBCASE("25 rows with n = 10 keeps rows 10 and 20 (1-indexed)") {
        std::vector<double> ts25;
        for (int i = 0; i < 25; ++i) ts25.push_back(0.1 * i);
        auto out25 = sample_by_events(hand_bundle(ts25), 10);
        REQUIRE(out25.size() == 2);
        CHECK(out25.snapshots[0].timestamp == doctest::Approx(0.9));
        CHECK(out25.snapshots[1].timestamp == doctest::Approx(1.9));
    }
}

TEST_CASE("sample_by_time zero-order hold") {
    SUBCASE("hand-enumerated grid assignment") {
        auto b = hand_bundle({0.0, 0.1, 0.3});
        auto out = sample_by_time(b, 0.25);
        REQUIRE(out.size() == 2);
        CHECK(out.snapshots[0].timestamp == doctest::Approx(0.1)); // grid 0.25
        CHECK(out.snapshots[1].timestamp == doctest::Approx(0.3)); // grid 0.50
    }
    SUBCASE("dt larger than the whole span emits one row") {
        auto b = hand_bundle({0.0, 0.1, 0.3});
        auto out = sample_by_time(b, 10.0);
        REQUIRE(out.size() == 1);
        CHECK(out.snapshots[0].timestamp == doctest::Approx(0.3));
    }
    SUBCASE("uniform 1 Hz rows with dt = 1 is identity minus the first row") {
        std::vector<double> ts;
        for (int i = 0; i < 8; ++i) ts.push_back(static_cast<double>(i));
        auto b = hand_bundle(ts);
        auto out = sample_by_time(b, 1.0);
        REQUIRE(out.size() == 7);
        for (int64_t i = 0; i < out.size(); ++i)
            CHECK(out.snapshots[static_cast<size_t>(i)].timestamp ==
                  doctest::Approx(static_cast<double>(i + 1)));
    }
}

TEST_CASE("sample_by_volume counts executions only, with mod carry") {
    using EK = EventKind;
    SUBCASE("three executions crossing once") {
        auto b = hand_bundle({0, 1, 2},
                             {{EK::ExecutionVisible, 200}, {EK::ExecutionVisible, 200},
                              {EK::ExecutionVisible, 150}});
        auto out = sample_by_volume(b, 500);
        REQUIRE(out.size() == 1);
        CHECK(out.snapshots[0].timestamp == doctest::Approx(2.0));
        // counter carried 50: one more execution of 450 triggers again
        auto b2 = hand_bundle({0, 1, 2, 3},
                              {{EK::ExecutionVisible, 200}, {EK::ExecutionVisible, 200},
                               {EK::ExecutionVisible, 150}, {EK::ExecutionVisible, 450}});
        auto out2 = sample_by_volume(b2, 500);
        REQUIRE(out2.size() == 2);
        CHECK(out2.snapshots[1].timestamp == doctest::Approx(3.0));
    }
    SUBCASE("single oversized execution emits once") {
        auto b = hand_bundle({0.0}, {{EK::ExecutionVisible, 600}});
        auto out = sample_by_volume(b, 500);
        CHECK(out.size() == 1);
    }
    SUBCASE("hidden executions count too") {
        auto b = hand_bundle({0, 1}, {{EK::ExecutionHidden, 300}, {EK::ExecutionHidden, 200}});
        CHECK(sample_by_volume(b, 500).size() == 1);
    }
    SUBCASE("quote updates never trigger") {
        auto b = hand_bundle({0, 1, 2},
                             {{EK::Submission, 600}, {EK::Cancellation, 600},
                              {EK::Deletion, 600}});
        CHECK(sample_by_volume(b, 500).size() == 0);
    }
    SUBCASE("bundle without events is unsupported") {
        auto b = hand_bundle({0, 1, 2});
        CHECK_THROWS_AS(sample_by_volume(b, 500), DataError);
    }
}

TEST_CASE("samplers output subsequences and respect the volume bound") {
    auto bundle = synth_lob(31, 2000, SynthRegime::random_walk());
    double executed = 0.0;
    for (const auto& e : bundle.events)
        if (is_execution(e.kind)) executed += e.size;

    const double v = 5000.0;
    auto by_vol = sample_by_volume(bundle, v);
    CHECK(by_vol.size() <= static_cast<int64_t>(executed / v) + 1);

    auto check_subsequence = [&bundle](const DatasetBundle& sampled) {
        size_t cursor = 0;
        for (const auto& r : sampled.snapshots) {
            while (cursor < bundle.snapshots.size() &&
                   bundle.snapshots[cursor].ask_prices != r.ask_prices)
                ++cursor;
            REQUIRE(cursor < bundle.snapshots.size());
            ++cursor;
        }
    };
    check_subsequence(by_vol);
    check_subsequence(sample_by_events(bundle, 7));
    check_subsequence(sample_by_time(bundle, 0.35));

    SUBCASE("events and aligned parts are carried through") {
        auto sampled = sample_by_events(bundle, 10);
        CHECK(sampled.has_events());
        CHECK(sampled.events.size() == sampled.snapshots.size());
        for (size_t i = 0; i < sampled.events.size(); ++i)
            CHECK(sampled.events[i].timestamp == sampled.snapshots[i].timestamp);
    }
    SUBCASE("re-sampling an event-sampled series with n=1 is identity") {
        auto once = sample_by_events(bundle, 10);
        auto twice = sample_by_events(once, 1);
        CHECK(asks(twice) == asks(once));
    }
}

TEST_CASE("apply_sampling dispatches by mode") {
    auto bundle = synth_lob(8, 100, SynthRegime::random_walk());
    CHECK(apply_sampling(bundle, SamplingSpec::events(10)).size() == 10);
    CHECK(apply_sampling(bundle, SamplingSpec::time(0.5)).size() > 0);
    CHECK(apply_sampling(bundle, SamplingSpec::volume(1000)).size() > 0);
    CHECK_THROWS_AS(apply_sampling(bundle, SamplingSpec::events(0)), ConfigError);
}
