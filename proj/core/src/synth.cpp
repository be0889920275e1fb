#include "evgrasp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "evgrasp/errors.hpp"

namespace evgrasp {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

Vec2 rig_offset(const MotionSpec& motion, double t_us) {
    if (motion.period_us <= 0.0) return {0.0, 0.0};
    const double w = 2.0 * std::numbers::pi / motion.period_us;
    return {motion.amp_x_px * std::sin(w * t_us + motion.phase_rad),
            motion.amp_y_px * std::cos(w * t_us + motion.phase_rad)};
}

// Emit the blink edges of one disk into `events`.
void emit_disk(const SyntheticScene& scene, Vec2 base_center, bool follow_rig, double period_us,
               double radius_px, double dropout, std::mt19937_64& rng,
               std::vector<Event>& events) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::normal_distribution<double> jitter(0.0, std::max(scene.jitter_std_us, 1e-12));
    const double half = period_us / 2.0;
    const double duration = double(scene.duration_us);

    for (std::uint64_t k = 0;; ++k) {
        const double t_edge = double(k) * half;
        if (t_edge > duration) break;
        const Polarity pol = (k % 2 == 0) ? Polarity::On : Polarity::Off;
        const Vec2 c = follow_rig ? base_center + rig_offset(scene.motion, t_edge) : base_center;

        const int x_lo = std::max(0, int(std::ceil(c.x - radius_px)));
        const int x_hi = std::min(kSensorWidth - 1, int(std::floor(c.x + radius_px)));
        const int y_lo = std::max(0, int(std::ceil(c.y - radius_px)));
        const int y_hi = std::min(kSensorHeight - 1, int(std::floor(c.y + radius_px)));
        const double r2 = radius_px * radius_px;

        for (int y = y_lo; y <= y_hi; ++y) {
            for (int x = x_lo; x <= x_hi; ++x) {
                const double dx = x - c.x;
                const double dy = y - c.y;
                if (dx * dx + dy * dy > r2) continue;
                if (dropout > 0.0 && u01(rng) < dropout) continue;
                double t = t_edge;
                if (scene.jitter_std_us > 0.0) t += jitter(rng);
                t = std::clamp(t, 0.0, duration);
                events.push_back(
                    Event{std::uint64_t(std::llround(t)), std::uint16_t(x), std::uint16_t(y), pol});
            }
        }
    }
}

void validate_scene(const SyntheticScene& scene) {
    if (scene.duration_us == 0) throw ConfigError("scene duration must be positive");
    if (scene.jitter_std_us < 0 || scene.background_rate_hz < 0) {
        throw ConfigError("noise parameters must be non-negative");
    }
    for (const LedSpec& m : scene.markers) {
        if (m.period_us <= 0) throw ConfigError("marker period must be positive");
        if (m.radius_px < 1.0) throw ConfigError("marker radius must be at least 1 px");
        if (m.dropout < 0 || m.dropout >= 1) throw ConfigError("dropout must be in [0, 1)");
    }
    for (const GhostSpec& g : scene.ghosts) {
        if (g.anchor_marker < 0 || g.anchor_marker >= int(scene.markers.size())) {
            throw ConfigError("ghost anchor_marker out of range");
        }
        if (g.period_us <= 0 || g.radius_px < 1.0) {
            throw ConfigError("ghost period and radius must be positive");
        }
    }
}

} // namespace

Vec2 marker_position(const SyntheticScene& scene, const LedSpec& marker, double t_us) {
    return marker.center + rig_offset(scene.motion, t_us);
}

double max_marker_speed_px_per_ms(const SyntheticScene& scene) {
    if (scene.motion.period_us <= 0.0) return 0.0;
    const double w = 2.0 * std::numbers::pi / scene.motion.period_us; // rad per us
    const double amp = std::max(std::abs(scene.motion.amp_x_px), std::abs(scene.motion.amp_y_px));
    return w * amp * 1000.0;
}

GeneratedStream generate(const SyntheticScene& scene) {
    validate_scene(scene);
    GeneratedStream out;

    const double speed = max_marker_speed_px_per_ms(scene);
    if (speed > 1.0) {
        std::ostringstream msg;
        msg << "rig speed " << speed << " px/ms exceeds the 1 px/ms tracking regime";
        out.warnings.push_back(msg.str());
    }

    for (std::size_t i = 0; i < scene.markers.size(); ++i) {
        const LedSpec& m = scene.markers[i];
        std::mt19937_64 rng(mix_seed(scene.seed, 0x100 + i));
        emit_disk(scene, m.center, true, m.period_us, m.radius_px, m.dropout, rng, out.events);
    }
    for (std::size_t i = 0; i < scene.ghosts.size(); ++i) {
        const GhostSpec& g = scene.ghosts[i];
        const LedSpec& anchor = scene.markers[g.anchor_marker];
        std::mt19937_64 rng(mix_seed(scene.seed, 0x200 + i));
        emit_disk(scene, anchor.center + g.offset, true, g.period_us, g.radius_px, g.dropout, rng,
                  out.events);
    }
    if (scene.background_rate_hz > 0.0) {
        std::mt19937_64 rng(mix_seed(scene.seed, 0x300));
        const double expected = scene.background_rate_hz * double(scene.duration_us) / 1e6;
        std::poisson_distribution<long long> pois(expected);
        std::uniform_real_distribution<double> ut(0.0, double(scene.duration_us));
        std::uniform_int_distribution<int> ux(0, kSensorWidth - 1);
        std::uniform_int_distribution<int> uy(0, kSensorHeight - 1);
        std::uniform_int_distribution<int> up(0, 1);
        const long long n = pois(rng);
        for (long long k = 0; k < n; ++k) {
            out.events.push_back(Event{std::uint64_t(std::llround(ut(rng))), std::uint16_t(ux(rng)),
                                       std::uint16_t(uy(rng)),
                                       up(rng) ? Polarity::On : Polarity::Off});
        }
    }

    std::stable_sort(out.events.begin(), out.events.end(),
                     [](const Event& a, const Event& b) { return a.t < b.t; });

    // ground truth at every tracker cycle boundary
    const bool full_quad = scene.markers.size() == 4;
    for (std::uint64_t t = 0; t <= scene.duration_us; t += 1000) {
        std::array<Vec2, 4> by_id{};
        bool ids_ok = full_quad;
        for (const LedSpec& m : scene.markers) {
            const Vec2 p = marker_position(scene, m, double(t));
            out.truth.rows.push_back({t, m.id, p.x, p.y});
            if (full_quad) {
                if (m.id >= 1 && m.id <= 4) {
                    by_id[m.id - 1] = p;
                } else {
                    ids_ok = false;
                }
            }
        }
        if (ids_ok) {
            try {
                out.truth.rects.push_back(quad_to_rect(quad_from_markers(by_id, scene.label, t)));
            } catch (const ValidationError&) {
                // degenerate marker layout at this instant; no rect
            }
        }
    }
    return out;
}

double IntervalHistogram::mode_period_us() const {
    if (counts.empty()) return 0.0;
    const auto it = std::max_element(counts.begin(), counts.end());
    if (*it == 0) return 0.0;
    return bin_center(std::size_t(it - counts.begin()));
}

double IntervalHistogram::mode_frequency_hz() const {
    const double p = mode_period_us();
    return p > 0.0 ? 1e6 / p : 0.0;
}

double IntervalHistogram::mode_period_in_range(double lo_us, double hi_us) const {
    double best_center = 0.0;
    std::uint64_t best = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double c = bin_center(i);
        if (c < lo_us || c > hi_us) continue;
        if (counts[i] > best) {
            best = counts[i];
            best_center = c;
        }
    }
    return best_center;
}

int IntervalHistogram::half_peak_width_bins(double lo_us, double hi_us) const {
    std::uint64_t peak = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double c = bin_center(i);
        if (c >= lo_us && c <= hi_us) peak = std::max(peak, counts[i]);
    }
    if (peak == 0) return 0;
    int width = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double c = bin_center(i);
        if (c >= lo_us && c <= hi_us && counts[i] * 2 >= peak) ++width;
    }
    return width;
}

IntervalHistogram interval_histogram(std::span<const TransitionInterval> intervals,
                                     double bin_width_us) {
    if (bin_width_us <= 0.0) throw ConfigError("histogram bin width must be positive");
    IntervalHistogram hist;
    hist.bin_width_us = bin_width_us;
    for (const TransitionInterval& iv : intervals) {
        const std::size_t bin = std::size_t(double(iv.delta) / bin_width_us);
        if (hist.counts.size() <= bin) hist.counts.resize(bin + 1, 0);
        ++hist.counts[bin];
        ++hist.total;
    }
    return hist;
}

IntervalHistogram interval_histogram(std::span<const Event> stream, double bin_width_us) {
    const PreprocessedStream pre = preprocess(stream);
    return interval_histogram(std::span<const TransitionInterval>(pre.intervals), bin_width_us);
}

void write_histogram_csv(std::ostream& out, const IntervalHistogram& hist) {
    out << "bin_start_us,bin_center_us,count,freq_hz\n";
    char buf[128];
    for (std::size_t i = 0; i < hist.counts.size(); ++i) {
        const double start = double(i) * hist.bin_width_us;
        const double center = hist.bin_center(i);
        std::snprintf(buf, sizeof(buf), "%.1f,%.1f,%llu,%.3f\n", start, center,
                      (unsigned long long)hist.counts[i], center > 0 ? 1e6 / center : 0.0);
        out << buf;
    }
}

void write_ground_truth_csv(std::ostream& out, std::span<const GroundTruthRow> rows) {
    out << "t_us,marker_id,true_x,true_y\n";
    char buf[96];
    for (const GroundTruthRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%llu,%d,%.4f,%.4f\n", (unsigned long long)r.t_us,
                      r.marker_id, r.x, r.y);
        out << buf;
    }
}

std::vector<GroundTruthRow> read_ground_truth_csv(std::istream& in) {
    std::vector<GroundTruthRow> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (line.rfind("t_us,", 0) == 0) continue;
        GroundTruthRow r;
        unsigned long long t = 0;
        if (std::sscanf(line.c_str(), "%llu,%d,%lf,%lf", &t, &r.marker_id, &r.x, &r.y) != 4) {
            throw ParseError("malformed ground-truth record", lineno);
        }
        r.t_us = t;
        rows.push_back(r);
    }
    return rows;
}

namespace {

using nlohmann::json;

Vec2 vec2_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) throw ParseError("expected [x, y] pair");
    return {j[0].get<double>(), j[1].get<double>()};
}

} // namespace

SyntheticScene scene_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("scene JSON: ") + e.what());
    }
    try {
        SyntheticScene scene;
        scene.duration_us = j.value("duration_us", std::uint64_t(1'000'000));
        scene.seed = j.value("seed", std::uint64_t(0));
        scene.jitter_std_us = j.value("jitter_std_us", 0.0);
        scene.background_rate_hz = j.value("background_rate_hz", 0.0);
        scene.label = j.value("label", std::string("good")) == "bad" ? GraspLabel::Bad
                                                                     : GraspLabel::Good;
        if (j.contains("motion")) {
            const json& m = j["motion"];
            scene.motion.amp_x_px = m.value("amp_x", 0.0);
            scene.motion.amp_y_px = m.value("amp_y", 0.0);
            scene.motion.period_us = m.value("period_us", 0.0);
            scene.motion.phase_rad = m.value("phase_rad", 0.0);
        }
        for (const json& mj : j.value("markers", json::array())) {
            LedSpec m;
            m.id = mj.value("id", int(scene.markers.size() + 1));
            m.period_us = mj.at("period_us").get<double>();
            m.radius_px = mj.value("radius_px", 2.5);
            m.center = vec2_from_json(mj.at("center"));
            m.dropout = mj.value("dropout", 0.0);
            scene.markers.push_back(m);
        }
        for (const json& gj : j.value("ghosts", json::array())) {
            GhostSpec g;
            g.anchor_marker = gj.at("anchor_marker").get<int>();
            g.offset = vec2_from_json(gj.at("offset"));
            g.period_us = gj.at("period_us").get<double>();
            g.radius_px = gj.value("radius_px", 1.5);
            g.dropout = gj.value("dropout", 0.5);
            scene.ghosts.push_back(g);
        }
        validate_scene(scene);
        return scene;
    } catch (const json::exception& e) {
        throw ParseError(std::string("scene JSON: ") + e.what());
    }
}

SyntheticScene load_scene_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scene file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return scene_from_json_text(buf.str());
}

std::string scene_to_json_text(const SyntheticScene& scene) {
    json j;
    j["duration_us"] = scene.duration_us;
    j["seed"] = scene.seed;
    j["jitter_std_us"] = scene.jitter_std_us;
    j["background_rate_hz"] = scene.background_rate_hz;
    j["label"] = scene.label == GraspLabel::Bad ? "bad" : "good";
    j["motion"] = {{"amp_x", scene.motion.amp_x_px},
                   {"amp_y", scene.motion.amp_y_px},
                   {"period_us", scene.motion.period_us},
                   {"phase_rad", scene.motion.phase_rad}};
    j["markers"] = json::array();
    for (const LedSpec& m : scene.markers) {
        j["markers"].push_back({{"id", m.id},
                                {"period_us", m.period_us},
                                {"radius_px", m.radius_px},
                                {"center", {m.center.x, m.center.y}},
                                {"dropout", m.dropout}});
    }
    j["ghosts"] = json::array();
    for (const GhostSpec& g : scene.ghosts) {
        j["ghosts"].push_back({{"anchor_marker", g.anchor_marker},
                               {"offset", {g.offset.x, g.offset.y}},
                               {"period_us", g.period_us},
                               {"radius_px", g.radius_px},
                               {"dropout", g.dropout}});
    }
    return j.dump(2) + "\n";
}

SyntheticScene benchmark_scene(BenchmarkProfile profile, std::uint64_t seed) {
    SyntheticScene scene;
    scene.seed = seed;
    scene.duration_us = 10'000'000;
    scene.jitter_std_us = 30.0;
    scene.motion = {30.0, 18.0, 1'000'000.0, 0.0};
    scene.markers = {
        {1, 3000.0, 2.5, {95.0, 65.0}, 0.0},
        {2, 3800.0, 2.5, {145.0, 65.0}, 0.0},
        {3, 4400.0, 2.5, {95.0, 115.0}, 0.0},
        {4, 5000.0, 2.5, {145.0, 115.0}, 0.0},
    };

    switch (profile) {
    case BenchmarkProfile::Clean:
        scene.background_rate_hz = 5'000.0;
        break;
    case BenchmarkProfile::NoisyLight:
        scene.background_rate_hz = 20'000.0;
        scene.ghosts = {
            {1, {6.0, 4.0}, 3000.0, 1.5, 0.5},  // marker 1's period shadowing marker 2
            {2, {-5.0, 5.0}, 3800.0, 1.5, 0.5}, // and the reverse
        };
        break;
    case BenchmarkProfile::NoisyMedium:
        scene.background_rate_hz = 30'000.0;
        scene.ghosts = {
            {1, {5.0, 4.0}, 3000.0, 2.0, 0.35},
            {2, {-5.0, 4.0}, 3800.0, 2.0, 0.35},
            {3, {4.0, -5.0}, 5000.0, 2.0, 0.35},
        };
        break;
    case BenchmarkProfile::NoisyHeavy:
        scene.background_rate_hz = 50'000.0;
        scene.jitter_std_us = 50.0;
        scene.ghosts = {
            {1, {4.0, 3.0}, 3000.0, 2.5, 0.2},
            {2, {-4.0, 3.0}, 3800.0, 2.5, 0.2},
            {3, {4.0, -3.0}, 5000.0, 2.5, 0.2},
            {0, {-4.0, -3.0}, 4400.0, 2.5, 0.2},
        };
        break;
    }
    return scene;
}

} // namespace evgrasp
