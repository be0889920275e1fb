#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "evgrasp/errors.hpp"
#include "evgrasp/smp_filter.hpp"
#include "evgrasp/synth.hpp"

using namespace evgrasp;

namespace {

// hand-assembled window: chosen intervals plus per-pixel event counts
struct TestWindow {
    std::vector<TransitionInterval> intervals;
    std::shared_ptr<std::vector<std::uint32_t>> counts =
        std::make_shared<std::vector<std::uint32_t>>(kSensorPixels, 0);

    void add_interval(int x, int y, std::uint64_t delta, std::uint64_t t = 5000) {
        intervals.push_back({t, delta, TransitionKind::P, std::uint16_t(x), std::uint16_t(y)});
    }
    void set_events(int x, int y, std::uint32_t n) { (*counts)[pixel_index(x, y)] = n; }

    WindowView view(std::uint64_t start = 0) const {
        return WindowView(start, 10'000, 1'000, intervals, counts);
    }
};

ParticleSet uniform_set(std::initializer_list<Vec2> positions) {
    ParticleSet set;
    for (Vec2 p : positions) set.particles.push_back({p, 0.0});
    set.reset_uniform_weights();
    return set;
}

} // namespace

TEST_CASE("triangle pdf has unit-area geometry") {
    const double mu = 3000.0, sigma = 100.0;
    const double peak = 2.0 / (5.0 * sigma);
    CHECK(triangle_pdf(mu, mu, sigma) == doctest::Approx(peak));
    CHECK(triangle_pdf(mu + 2.5 * sigma, mu, sigma) == 0.0);
    CHECK(triangle_pdf(mu - 2.5 * sigma, mu, sigma) == 0.0);
    CHECK(triangle_pdf(mu + 1.25 * sigma, mu, sigma) == doctest::Approx(1.0 / (5.0 * sigma)));
    CHECK(triangle_pdf(mu + 10 * sigma, mu, sigma) == 0.0);
    CHECK_THROWS_AS(triangle_pdf(0, 0, 0), ConfigError);

    // numeric area over the base
    double area = 0.0;
    const double dx = sigma / 1000.0;
    for (double x = mu - 3 * sigma; x < mu + 3 * sigma; x += dx) {
        area += triangle_pdf(x, mu, sigma) * dx;
    }
    CHECK(area == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("temporal evidence sums triangle hits and applies the event gate") {
    const MarkerSpec marker{1, 3000.0, 100.0};
    TestWindow w;
    w.add_interval(10, 10, 3000);
    w.add_interval(10, 10, 3000);
    w.set_events(10, 10, 6);
    w.add_interval(20, 20, 5000); // > 2.5 sigma away from 3000
    w.set_events(20, 20, 6);
    w.add_interval(30, 30, 3000); // only 2 raw events: gated
    w.set_events(30, 30, 2);

    const EvidenceMap et = temporal_evidence(w.view(), marker, 3);
    const double peak = 2.0 / (5.0 * marker.period_sigma_us);
    CHECK(et.at(10, 10) == doctest::Approx(2.0 * peak));
    CHECK(et.at(20, 20) == 0.0);
    CHECK(et.at(30, 30) == 0.0);
}

TEST_CASE("temporal evidence is selective between well separated markers") {
    const auto markers = default_markers();
    for (const MarkerSpec& m : markers) {
        TestWindow w;
        for (int i = 0; i < 4; ++i) w.add_interval(50, 50, std::uint64_t(m.period_us));
        w.set_events(50, 50, 8);
        const double own = temporal_evidence(w.view(), m, 3).at(50, 50);
        for (const MarkerSpec& other : markers) {
            if (other.id == m.id) continue;
            const double sep = std::abs(other.period_us - m.period_us);
            if (sep <= 2.5 * (m.period_sigma_us + other.period_sigma_us)) continue;
            CHECK(own > temporal_evidence(w.view(), other, 3).at(50, 50));
        }
    }
}

TEST_CASE("propagate: zero sigma is the identity, fixed seeds reproduce, bounds clamp") {
    ParticleSet set = uniform_set({{5, 5}, {100, 90}, {239, 179}});
    Rng rng(1);
    propagate(set, 0.0, rng);
    CHECK(set.particles[0].position.x == 5);
    CHECK(set.particles[2].position.y == 179);

    ParticleSet a = uniform_set({{0, 0}, {120, 90}});
    ParticleSet b = a;
    Rng ra(99), rb(99);
    propagate(a, 50.0, ra);
    propagate(b, 50.0, rb);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.particles[i].position.x == b.particles[i].position.x);
        CHECK(a.particles[i].position.y == b.particles[i].position.y);
        CHECK(a.particles[i].position.x >= 0.0);
        CHECK(a.particles[i].position.x <= 239.0);
        CHECK(a.particles[i].position.y >= 0.0);
        CHECK(a.particles[i].position.y <= 179.0);
    }
}

TEST_CASE("reselection trigger compares summed evidence against the threshold") {
    TestWindow w;
    w.add_interval(10, 10, 3000);
    w.set_events(10, 10, 5);
    const MarkerSpec marker{1, 3000.0, 100.0};
    const EvidenceMap et = temporal_evidence(w.view(), marker, 3);
    const double peak = 2.0 / (5.0 * marker.period_sigma_us);

    ParticleSet off_evidence = uniform_set({{100, 100}, {200, 50}});
    CHECK(check_reselect(off_evidence, et, 0.01));
    CHECK(!check_reselect(off_evidence, et, 0.0)); // strict comparison

    ParticleSet on_peak = uniform_set({{10, 10}});
    CHECK(!check_reselect(on_peak, et, peak * 0.99));
    CHECK(check_reselect(on_peak, et, peak + 1e-9));
}

TEST_CASE("reselect redraws over the evidence support and resets weights") {
    const MarkerSpec marker{1, 3000.0, 100.0};
    Rng rng(4);

    SUBCASE("single support pixel attracts every particle") {
        TestWindow w;
        w.add_interval(42, 17, 3000);
        w.set_events(42, 17, 5);
        const EvidenceMap et = temporal_evidence(w.view(), marker, 3);
        ParticleSet set = uniform_set({{0, 0}, {100, 100}, {200, 150}});
        reselect(set, et, rng);
        for (const Particle& p : set.particles) {
            CHECK(p.position.x == 42.0);
            CHECK(p.position.y == 17.0);
            CHECK(p.weight == doctest::Approx(1.0 / 3.0));
        }
    }
    SUBCASE("empty map falls back to a uniform redraw") {
        EvidenceMap et;
        ParticleSet set;
        set.particles.resize(2000, {{120, 90}, 0.0});
        set.reset_uniform_weights();
        reselect(set, et, rng);
        double mean_x = 0, mean_y = 0;
        for (const Particle& p : set.particles) {
            CHECK(p.position.x >= 0.0);
            CHECK(p.position.x <= 239.0);
            CHECK(p.position.y >= 0.0);
            CHECK(p.position.y <= 179.0);
            mean_x += p.position.x;
            mean_y += p.position.y;
        }
        // spread over the sensor, not stuck at the old position
        CHECK(mean_x / 2000 == doctest::Approx(119.5).epsilon(0.05));
        CHECK(mean_y / 2000 == doctest::Approx(89.5).epsilon(0.05));
    }
}

TEST_CASE("spatial evidence follows the gaussian fit of the evidence map") {
    const MarkerSpec marker{1, 3000.0, 100.0};

    SUBCASE("point mass: the on-pixel particle dominates") {
        TestWindow w;
        w.add_interval(60, 60, 3000);
        w.set_events(60, 60, 5);
        EvidenceMap et = temporal_evidence(w.view(), marker, 3);
        et.normalize();
        const GaussianFit fit = fit_evidence_gaussian(et);
        CHECK(fit.mean.x == doctest::Approx(60.0));
        CHECK(fit.mean.y == doctest::Approx(60.0));
        CHECK(fit.cxx == doctest::Approx(1e-6));

        ParticleSet set = uniform_set({{60, 60}, {62, 60}});
        const auto es = spatial_evidence(set, et);
        CHECK(es[0] > es[1]);
        CHECK(es[0] + es[1] == doctest::Approx(1.0));
    }
    SUBCASE("two equal pixels fit their midpoint") {
        TestWindow w;
        w.add_interval(50, 80, 3000);
        w.set_events(50, 80, 5);
        w.add_interval(70, 80, 3000);
        w.set_events(70, 80, 5);
        EvidenceMap et = temporal_evidence(w.view(), marker, 3);
        et.normalize();
        const GaussianFit fit = fit_evidence_gaussian(et);
        CHECK(fit.mean.x == doctest::Approx(60.0));
        CHECK(fit.mean.y == doctest::Approx(80.0));
    }
    SUBCASE("a particle many deviations out is negligible") {
        TestWindow w;
        for (int x = 58; x <= 62; ++x) {
            w.add_interval(x, 60, 3000);
            w.set_events(x, 60, 5);
        }
        EvidenceMap et = temporal_evidence(w.view(), marker, 3);
        et.normalize();
        ParticleSet set = uniform_set({{60, 60}, {60 + 40, 60}}); // ~28 std devs out
        const auto es = spatial_evidence(set, et);
        CHECK(es[1] < es[0] * 1e-6);
    }
}

TEST_CASE("weight update multiplies prior weights by mixed evidence") {
    TestWindow w;
    w.add_interval(10, 10, 3000);
    w.set_events(10, 10, 5);
    const MarkerSpec marker{1, 3000.0, 100.0};
    EvidenceMap et = temporal_evidence(w.view(), marker, 3);
    et.normalize();

    SUBCASE("alpha 0 reduces to the temporal-only update") {
        ParticleSet set = uniform_set({{10, 10}, {100, 100}});
        const std::vector<double> es = {0.5, 0.5};
        CHECK(!update_weights(set, et, es, 0.0));
        CHECK(set.particles[0].weight == doctest::Approx(1.0));
        CHECK(set.particles[1].weight == doctest::Approx(0.0));
    }
    SUBCASE("uniform evidence keeps uniform weights") {
        ParticleSet set = uniform_set({{100, 100}, {120, 80}, {140, 60}});
        const std::vector<double> es = {0.25, 0.25, 0.25};
        update_weights(set, et, es, 1.0);
        for (const Particle& p : set.particles) {
            CHECK(p.weight == doctest::Approx(1.0 / 3.0));
        }
    }
    SUBCASE("doubled evidence doubles the weight ratio") {
        ParticleSet set = uniform_set({{100, 100}, {120, 80}});
        const std::vector<double> es = {0.2, 0.1};
        update_weights(set, et, es, 1.0);
        CHECK(set.particles[0].weight / set.particles[1].weight == doctest::Approx(2.0));
    }
    SUBCASE("all-zero likelihood resets uniform and reports degeneration") {
        ParticleSet set = uniform_set({{100, 100}, {120, 80}});
        const std::vector<double> es = {0.0, 0.0};
        CHECK(update_weights(set, et, es, 1.0));
        CHECK(set.particles[0].weight == doctest::Approx(0.5));
    }
}

TEST_CASE("effective count and conditional resampling") {
    SUBCASE("uniform weights never trigger") {
        ParticleSet set;
        set.particles.resize(100, {{10, 10}, 0.0});
        set.reset_uniform_weights();
        CHECK(effective_count(set) == doctest::Approx(100.0));
        Rng rng(1);
        CHECK(!maybe_resample(set, 1.0, rng));
    }
    SUBCASE("a one-hot set collapses to the surviving particle") {
        ParticleSet set = uniform_set({{1, 1}, {2, 2}, {3, 3}});
        set.particles[0].weight = 1.0;
        set.particles[1].weight = 0.0;
        set.particles[2].weight = 0.0;
        CHECK(effective_count(set) == doctest::Approx(1.0));
        Rng rng(2);
        CHECK(maybe_resample(set, 0.5, rng));
        for (const Particle& p : set.particles) {
            CHECK(p.position.x == 1.0);
            CHECK(p.weight == doctest::Approx(1.0 / 3.0));
        }
    }
    SUBCASE("two half weights give n_eff of 2") {
        ParticleSet set = uniform_set({{1, 1}, {2, 2}, {3, 3}, {4, 4}});
        set.particles[0].weight = 0.5;
        set.particles[1].weight = 0.5;
        set.particles[2].weight = 0.0;
        set.particles[3].weight = 0.0;
        CHECK(effective_count(set) == doctest::Approx(2.0));
    }
    SUBCASE("n_eff of normalized weights stays within [1, N]") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int round = 0; round < 50; ++round) {
            ParticleSet set;
            set.particles.resize(64, {{0, 0}, 0.0});
            double sum = 0;
            for (Particle& p : set.particles) {
                p.weight = u(rng);
                sum += p.weight;
            }
            for (Particle& p : set.particles) p.weight /= sum;
            const double n_eff = effective_count(set);
            CHECK(n_eff >= 1.0 - 1e-9);
            CHECK(n_eff <= 64.0 + 1e-9);
        }
    }
}

TEST_CASE("position estimate is the weighted mean") {
    ParticleSet all_same = uniform_set({{7, 9}, {7, 9}, {7, 9}});
    CHECK(estimate_position(all_same).x == doctest::Approx(7.0));
    CHECK(estimate_position(all_same).y == doctest::Approx(9.0));

    ParticleSet halves = uniform_set({{0, 0}, {10, 0}});
    CHECK(estimate_position(halves).x == doctest::Approx(5.0));

    ParticleSet skewed = uniform_set({{0, 0}, {10, 0}});
    skewed.particles[0].weight = 0.9;
    skewed.particles[1].weight = 0.1;
    CHECK(estimate_position(skewed).x == doctest::Approx(1.0));
    CHECK(estimate_position(skewed).y == doctest::Approx(0.0));
}

TEST_CASE("track cycle on an empty window triggers reselection, never throws") {
    SmpTracker tracker(default_markers(), {});
    TestWindow w;
    const auto records = tracker.track_cycle(w.view());
    REQUIRE(records.size() == 4);
    for (const TrackRecord& r : records) {
        CHECK(r.reselected);
        CHECK(r.t_us == 5000);
    }
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(tracker.particles(i).size() == 1000);
    }
}

TEST_CASE("weights stay normalized through random tracking cycles") {
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> ux(0, kSensorWidth - 1);
    std::uniform_int_distribution<int> uy(0, kSensorHeight - 1);
    std::uniform_int_distribution<std::uint64_t> ud(2500, 5500);

    SmpTracker tracker(default_markers(), {});
    for (int cycle = 0; cycle < 30; ++cycle) {
        TestWindow w;
        for (int i = 0; i < 60; ++i) {
            const int x = ux(rng), y = uy(rng);
            w.add_interval(x, y, ud(rng), cycle * 1000 + 500);
            w.set_events(x, y, 6);
        }
        tracker.track_cycle(w.view(cycle * 1000));
        for (std::size_t m = 0; m < tracker.marker_count(); ++m) {
            CHECK(tracker.particles(m).weight_sum() == doctest::Approx(1.0).epsilon(1e-9));
            CHECK(tracker.particles(m).size() == 1000);
        }
    }
}

TEST_CASE("tracker is deterministic for a fixed seed") {
    SyntheticScene scene;
    scene.duration_us = 300'000;
    scene.seed = 12;
    scene.jitter_std_us = 20.0;
    scene.background_rate_hz = 10'000.0;
    scene.markers = {{1, 3000.0, 2.5, {60.0, 50.0}, 0.0}, {2, 5000.0, 2.5, {180.0, 120.0}, 0.0}};
    const GeneratedStream stream = generate(scene);
    const PreprocessedStream pre = preprocess(stream.events);

    const std::vector<MarkerSpec> markers = {{1, 3000.0, 100.0}, {2, 5000.0, 100.0}};
    FilterConfig cfg;
    cfg.seed = 77;

    std::vector<TrackRecord> run1, run2;
    for (std::vector<TrackRecord>* sink : {&run1, &run2}) {
        SmpTracker tracker(markers, cfg);
        WindowSequence seq(pre.events, pre.intervals, {});
        while (auto w = seq.next()) {
            for (const TrackRecord& r : tracker.track_cycle(*w)) sink->push_back(r);
        }
    }
    REQUIRE(run1.size() == run2.size());
    for (std::size_t i = 0; i < run1.size(); ++i) {
        CHECK(run1[i].x == run2[i].x);
        CHECK(run1[i].y == run2[i].y);
        CHECK(run1[i].n_eff == run2[i].n_eff);
    }
}

TEST_CASE("a static blinking led is locked within 3 px inside 50 cycles") {
    SyntheticScene scene;
    scene.duration_us = 100'000;
    scene.seed = 3;
    scene.jitter_std_us = 20.0;
    scene.markers = {{1, 3000.0, 2.5, {60.0, 50.0}, 0.0}};
    const GeneratedStream stream = generate(scene);
    const PreprocessedStream pre = preprocess(stream.events);

    SmpTracker tracker({{1, 3000.0, 100.0}}, {});
    WindowSequence seq(pre.events, pre.intervals, {});
    std::uint64_t cycle = 0;
    while (auto w = seq.next()) {
        tracker.track_cycle(*w);
        ++cycle;
        if (cycle >= 50) break;
    }
    CHECK(distance(tracker.position(0), {60.0, 50.0}) < 3.0);
}

TEST_CASE("two markers lock to their own leds without swapping") {
    SyntheticScene scene;
    scene.duration_us = 500'000;
    scene.seed = 9;
    scene.jitter_std_us = 20.0;
    scene.markers = {{1, 3000.0, 2.5, {60.0, 50.0}, 0.0}, {2, 5000.0, 2.5, {180.0, 120.0}, 0.0}};
    const GeneratedStream stream = generate(scene);
    const PreprocessedStream pre = preprocess(stream.events);

    SmpTracker tracker({{1, 3000.0, 100.0}, {2, 5000.0, 100.0}}, {});
    WindowSequence seq(pre.events, pre.intervals, {});
    int checked = 0;
    std::uint64_t cycle = 0;
    while (auto w = seq.next()) {
        tracker.track_cycle(*w);
        if (++cycle >= 100 && cycle % 50 == 0 && cycle <= 450) {
            CHECK(distance(tracker.position(0), {60.0, 50.0}) < 3.0);
            CHECK(distance(tracker.position(1), {180.0, 120.0}) < 3.0);
            ++checked;
        }
    }
    CHECK(checked > 0);
}

TEST_CASE("track csv round trips") {
    std::vector<TrackRecord> records = {
        {0, 5000, 1, 12.5, 17.25, 512.0, true, false, false},
        {1, 6000, 2, 100.0, 90.125, 77.5, false, true, false},
    };
    std::ostringstream out;
    write_track_csv(out, records);
    std::istringstream in(out.str());
    const auto back = read_track_csv(in);
    REQUIRE(back.size() == 2);
    CHECK(back[0].cycle == 0);
    CHECK(back[0].t_us == 5000);
    CHECK(back[0].marker_id == 1);
    CHECK(back[0].x == doctest::Approx(12.5));
    CHECK(back[0].reselected);
    CHECK(!back[0].resampled);
    CHECK(back[1].resampled);
}

TEST_CASE("failure counting flags pairs tracked together beyond the cycle budget") {
    std::vector<TrackRecord> log;
    const auto add_cycle = [&](std::uint64_t k, Vec2 a, Vec2 b) {
        log.push_back({k, k * 1000, 1, a.x, a.y, 900, false, false, false});
        log.push_back({k, k * 1000, 2, b.x, b.y, 900, false, false, false});
    };
    SUBCASE("101 consecutive close cycles fail") {
        for (std::uint64_t k = 0; k < 150; ++k) add_cycle(k, {10, 10}, {11, 10});
        CHECK(count_tracking_failures(log, 2.0, 100) == 1);
    }
    SUBCASE("99 close cycles with a break never fail") {
        for (std::uint64_t k = 0; k < 99; ++k) add_cycle(k, {10, 10}, {11, 10});
        add_cycle(99, {10, 10}, {50, 50});
        for (std::uint64_t k = 100; k < 199; ++k) add_cycle(k, {10, 10}, {11, 10});
        CHECK(count_tracking_failures(log, 2.0, 100) == 0);
    }
}
