#pragma once

// Shared helpers and independent oracles for the test suites. Oracles here
// deliberately avoid the library's own code paths.

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "evgrasp/annotation.hpp"
#include "evgrasp/event.hpp"
#include "evgrasp/pipeline.hpp"

namespace evtest {

// ------------------------------------------------------------------------
// Brute-force interval oracle: per pixel and per transition kind, list the
// transition times by replaying a standalone state machine, then difference
// consecutive entries. Positive gaps only, matching the delta > 0 invariant.
// ------------------------------------------------------------------------
struct OracleInterval {
    std::uint64_t t;
    std::uint64_t delta;
    int kind; // 0 = P, 1 = N
    int x;
    int y;

    bool operator==(const OracleInterval&) const = default;
    auto operator<=>(const OracleInterval&) const = default;
};

inline std::vector<OracleInterval> brute_force_intervals(const std::vector<evgrasp::Event>& events) {
    // state: 0 unknown, 1 plus, 2 minus
    std::map<std::pair<int, int>, int> state;
    std::map<std::pair<int, int>, std::vector<std::uint64_t>> times[2];

    for (const evgrasp::Event& e : events) {
        const std::pair<int, int> px{e.x, e.y};
        const int next = e.polarity == evgrasp::Polarity::On ? 1 : 2;
        auto it = state.find(px);
        const int cur = it == state.end() ? 0 : it->second;
        state[px] = next;
        if (cur == 0 || cur == next) continue;
        const int kind = next == 1 ? 0 : 1;
        times[kind][px].push_back(e.t);
    }

    std::vector<OracleInterval> out;
    for (int kind = 0; kind < 2; ++kind) {
        for (const auto& [px, ts] : times[kind]) {
            for (std::size_t i = 1; i < ts.size(); ++i) {
                if (ts[i] > ts[i - 1]) {
                    out.push_back({ts[i], ts[i] - ts[i - 1], kind, px.first, px.second});
                }
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline std::vector<OracleInterval> as_oracle(const std::vector<evgrasp::TransitionInterval>& ivs) {
    std::vector<OracleInterval> out;
    out.reserve(ivs.size());
    for (const auto& iv : ivs) {
        out.push_back({iv.t, iv.delta, iv.kind == evgrasp::TransitionKind::P ? 0 : 1, iv.x, iv.y});
    }
    std::sort(out.begin(), out.end());
    return out;
}

// random event stream over a small pixel patch so pixels see repeat traffic
inline std::vector<evgrasp::Event> random_events(std::mt19937_64& rng, std::size_t count,
                                                 int patch = 16) {
    std::uniform_int_distribution<int> ux(0, patch - 1);
    std::uniform_int_distribution<int> uy(0, patch - 1);
    std::uniform_int_distribution<int> up(0, 1);
    std::uniform_int_distribution<std::uint64_t> udt(0, 500);
    std::vector<evgrasp::Event> events;
    std::uint64_t t = 0;
    for (std::size_t i = 0; i < count; ++i) {
        t += udt(rng);
        events.push_back({t, std::uint16_t(ux(rng)), std::uint16_t(uy(rng)),
                          up(rng) ? evgrasp::Polarity::On : evgrasp::Polarity::Off});
    }
    return events;
}

// ------------------------------------------------------------------------
// Rasterization oracle for the rotated-rectangle Jaccard index: midpoint
// sampling over the intersection of both bounding boxes.
// ------------------------------------------------------------------------
inline bool inside_rect(const evgrasp::GraspRect& r, double px, double py) {
    const double rad = r.theta_deg * 3.14159265358979323846 / 180.0;
    const double ux = std::cos(rad), uy = std::sin(rad);
    const double dx = px - r.center.x, dy = py - r.center.y;
    const double along = dx * ux + dy * uy;
    const double across = -dx * uy + dy * ux;
    return std::abs(along) <= r.width / 2.0 && std::abs(across) <= r.height / 2.0;
}

inline double raster_jaccard(const evgrasp::GraspRect& a, const evgrasp::GraspRect& b,
                             double grid = 0.02) {
    const auto bounds = [](const evgrasp::GraspRect& r) {
        double lo_x = 1e30, lo_y = 1e30, hi_x = -1e30, hi_y = -1e30;
        for (const evgrasp::Vec2& c : r.corners()) {
            lo_x = std::min(lo_x, c.x);
            lo_y = std::min(lo_y, c.y);
            hi_x = std::max(hi_x, c.x);
            hi_y = std::max(hi_y, c.y);
        }
        return std::array<double, 4>{lo_x, lo_y, hi_x, hi_y};
    };
    const auto ba = bounds(a);
    const auto bb = bounds(b);
    const double lo_x = std::max(ba[0], bb[0]), hi_x = std::min(ba[2], bb[2]);
    const double lo_y = std::max(ba[1], bb[1]), hi_y = std::min(ba[3], bb[3]);

    double inter = 0.0;
    if (lo_x < hi_x && lo_y < hi_y) {
        long long cells = 0;
        for (double y = lo_y + grid / 2.0; y < hi_y; y += grid) {
            for (double x = lo_x + grid / 2.0; x < hi_x; x += grid) {
                if (inside_rect(a, x, y) && inside_rect(b, x, y)) ++cells;
            }
        }
        inter = double(cells) * grid * grid;
    }
    const double uni = a.width * a.height + b.width * b.height - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

} // namespace evtest
