#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "evgrasp/errors.hpp"
#include "evgrasp/event_io.hpp"
#include "evgrasp/pipeline.hpp"
#include "evgrasp/window.hpp"
#include "test_util.hpp"

using namespace evgrasp;

namespace {

Event ev(std::uint64_t t, int x, int y, bool on) {
    return {t, std::uint16_t(x), std::uint16_t(y), on ? Polarity::On : Polarity::Off};
}

std::vector<Event> ingest_text(const std::string& text) {
    std::istringstream in(text);
    return ingest(in, {EventFileFormat::Csv, 1000});
}

} // namespace

TEST_CASE("csv ingest maps fields directly") {
    const auto events = ingest_text("1000,5,7,1\n");
    REQUIRE(events.size() == 1);
    CHECK(events[0] == ev(1000, 5, 7, true));
}

TEST_CASE("csv ingest rejects out-of-range coordinates") {
    CHECK_THROWS_AS(ingest_text("1000,240,7,1\n"), ValidationError);
    CHECK_THROWS_AS(ingest_text("1000,0,180,0\n"), ValidationError);
}

TEST_CASE("empty file ingests to an empty stream") {
    CHECK(ingest_text("").empty());
}

TEST_CASE("csv ingest flags malformed records with the line number") {
    try {
        ingest_text("100,1,1,1\nnot,a,record\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(ingest_text("100,1,1,2\n"), ParseError);     // bad polarity
    CHECK_THROWS_AS(ingest_text("100,1,1\n"), ParseError);       // missing field
    CHECK_THROWS_AS(ingest_text("100,1,1,1,9\n"), ParseError);   // extra field
}

TEST_CASE("small timestamp regressions are repaired, large ones rejected") {
    const auto events = ingest_text("2000,1,1,1\n1500,2,2,0\n2500,3,3,1\n");
    REQUIRE(events.size() == 3);
    CHECK(events[0].t == 1500);
    CHECK(events[1].t == 2000);

    CHECK_THROWS_AS(ingest_text("5000,1,1,1\n1000,2,2,0\n"), OrderingError);
}

TEST_CASE("binary round trip is bit exact") {
    std::mt19937_64 rng(42);
    const auto events = evtest::random_events(rng, 500);

    std::ostringstream out(std::ios::binary);
    write_events_binary(out, events);
    const std::string payload = out.str();
    CHECK(payload.substr(0, 8) == "EVGRSP01");

    std::istringstream in(payload, std::ios::binary);
    CHECK(ingest(in, {EventFileFormat::Binary, 1000}) == events);

    // auto-detection sniffs the magic
    std::istringstream in2(payload, std::ios::binary);
    CHECK(ingest(in2) == events);

    std::ostringstream csv_out;
    write_events_csv(csv_out, events);
    std::istringstream csv_in(csv_out.str());
    CHECK(ingest(csv_in) == events);
}

TEST_CASE("binary ingest reports truncation") {
    std::ostringstream out(std::ios::binary);
    write_events_binary(out, std::vector<Event>{ev(1, 2, 3, true)});
    std::string payload = out.str();
    payload.pop_back();
    std::istringstream in(payload, std::ios::binary);
    CHECK_THROWS_AS(ingest(in, {EventFileFormat::Binary, 1000}), ParseError);
}

TEST_CASE("apply_event state machine") {
    PixelStateGrid grid;

    SUBCASE("first event seeds the state without a transition") {
        CHECK(!grid.apply_event(ev(10, 3, 4, true)).has_value());
        CHECK(grid.state(3, 4) == PixelState::Plus);
    }
    SUBCASE("minus to plus emits a positive transition") {
        grid.apply_event(ev(10, 3, 4, false));
        const auto tr = grid.apply_event(ev(20, 3, 4, true));
        REQUIRE(tr.has_value());
        CHECK(tr->kind == TransitionKind::P);
        CHECK(tr->t == 20);
    }
    SUBCASE("repeated polarity changes nothing") {
        grid.apply_event(ev(10, 3, 4, true));
        CHECK(!grid.apply_event(ev(20, 3, 4, true)).has_value());
        CHECK(grid.state(3, 4) == PixelState::Plus);
        CHECK(!grid.last_transition(3, 4, TransitionKind::P).has_value());
    }
    SUBCASE("out-of-bounds events are rejected") {
        CHECK_THROWS_AS(grid.apply_event(Event{1, 240, 0, Polarity::On}), ValidationError);
    }
}

TEST_CASE("interval_of differences same-kind transitions") {
    PixelStateGrid grid;

    SUBCASE("p at 3 then p at 8 gives delta 5") {
        grid.apply_event(ev(1, 0, 0, false));
        const auto p1 = grid.apply_event(ev(3, 0, 0, true));
        REQUIRE(p1);
        CHECK(!grid.interval_of(*p1).has_value()); // first p has no predecessor
        grid.apply_event(ev(5, 0, 0, false));
        const auto p2 = grid.apply_event(ev(8, 0, 0, true));
        REQUIRE(p2);
        const auto iv = grid.interval_of(*p2);
        REQUIRE(iv);
        CHECK(iv->delta == 5);
        CHECK(iv->t == 8);
        CHECK(iv->kind == TransitionKind::P);
    }
    SUBCASE("intervening n transition does not disturb the p interval") {
        grid.apply_event(ev(1, 0, 0, false));
        grid.apply_event(ev(3, 0, 0, true));  // p
        const auto n1 = grid.apply_event(ev(5, 0, 0, false)); // n
        REQUIRE(n1);
        CHECK(!grid.interval_of(*n1).has_value());
        const auto p2 = grid.apply_event(ev(8, 0, 0, true));
        REQUIRE(p2);
        CHECK(grid.interval_of(*p2)->delta == 5);
    }
}

TEST_CASE("pipeline equals the brute-force per-pixel oracle") {
    std::mt19937_64 rng(2024);
    for (int round = 0; round < 20; ++round) {
        auto events = evtest::random_events(rng, 2000, 8);
        const auto pre = preprocess(events);
        CHECK(evtest::as_oracle(pre.intervals) == evtest::brute_force_intervals(events));
    }
}

TEST_CASE("every emitted interval is positive") {
    std::mt19937_64 rng(7);
    // force heavy same-timestamp traffic
    std::vector<Event> events;
    std::uniform_int_distribution<int> up(0, 1);
    for (std::uint64_t t = 0; t < 200; ++t) {
        for (int k = 0; k < 4; ++k) {
            events.push_back(ev(t, 1, 1, up(rng) == 1));
        }
    }
    const auto pre = preprocess(events);
    for (const auto& iv : pre.intervals) CHECK(iv.delta > 0);
    // the oracle agrees even under same-microsecond flicker
    CHECK(evtest::as_oracle(pre.intervals) == evtest::brute_force_intervals(events));
}

TEST_CASE("ideal square wave yields intervals equal to the period") {
    const std::uint64_t period = 3000;
    std::vector<Event> events;
    for (int k = 0; k < 40; ++k) {
        events.push_back(ev(k * period / 2, 9, 9, k % 2 == 0));
    }
    const auto pre = preprocess(events);
    REQUIRE(!pre.intervals.empty());
    for (const auto& iv : pre.intervals) CHECK(iv.delta == period);
}

TEST_CASE("windows contain exactly the intervals in [start, start+length)") {
    std::vector<Event> events = {ev(400, 1, 1, false), ev(500, 1, 1, true),
                                 ev(10'400, 1, 1, false), ev(10'500, 1, 1, true)};
    // fabricate intervals at t = 500 and t = 10'500
    std::vector<TransitionInterval> ivs = {
        {500, 100, TransitionKind::P, 1, 1},
        {10'500, 100, TransitionKind::P, 1, 1},
    };
    const auto windows = collect_windows(events, ivs, {10'000, 1'000, 0, 2'000});
    REQUIRE(windows.size() == 2);
    CHECK(windows[0].start() == 0);
    CHECK(windows[1].start() == 1'000);
    REQUIRE(windows[0].intervals().size() == 1);
    CHECK(windows[0].intervals()[0].t == 500);
    // second window [1000, 11000) picks up both the t=10500 interval
    CHECK(windows[1].intervals().size() == 1);
    CHECK(windows[1].intervals()[0].t == 10'500);
}

TEST_CASE("window k starts at k*step and counts raw events") {
    std::mt19937_64 rng(5);
    auto events = evtest::random_events(rng, 3000, 6);
    const auto pre = preprocess(events);
    WindowSequence seq(pre.events, pre.intervals, {10'000, 1'000, 0, 0});

    std::uint64_t k = 0;
    while (auto w = seq.next()) {
        CHECK(w->start() == k * 1'000);
        // spot-check the counts on a few windows
        if (k % 37 == 0) {
            std::vector<std::uint32_t> expect(kSensorPixels, 0);
            for (const Event& e : events) {
                if (e.t >= w->start() && e.t < w->end()) ++expect[pixel_index(e.x, e.y)];
            }
            bool all_ok = true;
            for (int y = 0; y < 6 && all_ok; ++y) {
                for (int x = 0; x < 6 && all_ok; ++x) {
                    all_ok = w->events_at(x, y) == expect[pixel_index(x, y)];
                }
            }
            CHECK(all_ok);
        }
        ++k;
    }
    CHECK(k == (events.back().t / 1'000) + 1);
}

TEST_CASE("empty streams still emit windows over the requested range") {
    const auto windows = collect_windows({}, {}, {10'000, 1'000, 0, 3'000});
    CHECK(windows.size() == 3);
    for (const auto& w : windows) {
        CHECK(w.intervals().empty());
        CHECK(w.events_at(0, 0) == 0);
    }
}

TEST_CASE("window configuration errors") {
    CHECK_THROWS_AS(collect_windows({}, {}, {10'000, 0, 0, 0}), ConfigError);
    CHECK_THROWS_AS(collect_windows({}, {}, {1'000, 2'000, 0, 0}), ConfigError);
}

TEST_CASE("window completeness: step-sized sub-ranges tile the stream") {
    std::mt19937_64 rng(11);
    auto events = evtest::random_events(rng, 4000, 10);
    const auto pre = preprocess(events);

    // length == step: consecutive windows partition the events exactly
    WindowSequence seq(pre.events, pre.intervals, {1'000, 1'000, 0, 0});
    std::uint64_t total = 0;
    while (auto w = seq.next()) {
        for (int y = 0; y < 10; ++y) {
            for (int x = 0; x < 10; ++x) total += w->events_at(x, y);
        }
    }
    CHECK(total == events.size());
}
