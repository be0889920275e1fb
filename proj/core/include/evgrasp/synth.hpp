#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "evgrasp/annotation.hpp"
#include "evgrasp/event.hpp"
#include "evgrasp/geometry.hpp"
#include "evgrasp/pipeline.hpp"

namespace evgrasp {

/// Shared periodic rig path: offset(t) = (amp_x sin(wt + phase), amp_y cos(wt + phase)).
/// A zero period means the scene is static.
struct MotionSpec {
    double amp_x_px = 0.0;
    double amp_y_px = 0.0;
    double period_us = 0.0;
    double phase_rad = 0.0;
};

/// One blinking LED disk.
struct LedSpec {
    int id = 1;
    double period_us = 3000.0;
    double radius_px = 2.5;
    Vec2 center;          // position at phase zero, before the rig path offset
    double dropout = 0.0; // per-pixel per-edge emission drop probability
};

/// Interference disk: shadows the anchor marker's path at an offset while
/// blinking at a foreign marker's period. Models reflection and cross-impact
/// noise.
struct GhostSpec {
    int anchor_marker = 0; // index into SyntheticScene::markers
    Vec2 offset;
    double period_us = 3000.0;
    double radius_px = 1.5;
    double dropout = 0.5;
};

struct SyntheticScene {
    std::vector<LedSpec> markers;
    std::vector<GhostSpec> ghosts;
    MotionSpec motion;
    double background_rate_hz = 0.0; // Poisson events/s over the whole sensor
    double jitter_std_us = 0.0;      // Gaussian timestamp jitter per event
    std::uint64_t duration_us = 1'000'000;
    std::uint64_t seed = 0;
    GraspLabel label = GraspLabel::Good; // for derived ground-truth rects
};

struct GroundTruthRow {
    std::uint64_t t_us = 0;
    int marker_id = 0;
    double x = 0.0;
    double y = 0.0;
};

/// Marker centers at every 1 ms cycle boundary, plus the grasp rectangle they
/// span when the scene has exactly four markers.
struct GroundTruth {
    std::vector<GroundTruthRow> rows;
    std::vector<GraspRect> rects;
};

struct GeneratedStream {
    std::vector<Event> events; // time-ordered
    GroundTruth truth;
    std::vector<std::string> warnings;
};

/// True center of `marker` at time t under the scene's rig path.
Vec2 marker_position(const SyntheticScene& scene, const LedSpec& marker, double t_us);

/// Peak rig speed in px/ms; the tracking regime expects <= 1.
double max_marker_speed_px_per_ms(const SyntheticScene& scene);

/// Deterministic scene synthesis: every disk pixel fires on each square-wave
/// edge (ON rising, OFF falling), jittered, over Poisson background noise.
GeneratedStream generate(const SyntheticScene& scene);

/// Histogram of transition-interval lengths; bin i covers
/// [i*bin_width, (i+1)*bin_width) microseconds.
struct IntervalHistogram {
    double bin_width_us = 50.0;
    std::vector<std::uint64_t> counts;
    std::uint64_t total = 0;

    double bin_center(std::size_t i) const { return (double(i) + 0.5) * bin_width_us; }
    /// Center of the globally heaviest bin; 0 on an empty histogram.
    double mode_period_us() const;
    double mode_frequency_hz() const;
    /// Center of the heaviest bin within [lo, hi] microseconds.
    double mode_period_in_range(double lo_us, double hi_us) const;
    /// Bins at or above half the peak mass within [lo, hi]; a spread measure.
    int half_peak_width_bins(double lo_us, double hi_us) const;
};

IntervalHistogram interval_histogram(std::span<const Event> stream, double bin_width_us = 50.0);
IntervalHistogram interval_histogram(std::span<const TransitionInterval> intervals,
                                     double bin_width_us = 50.0);

/// CSV rows: bin_start_us,bin_center_us,count,freq_hz
void write_histogram_csv(std::ostream& out, const IntervalHistogram& hist);

/// Ground-truth CSV: t_us,marker_id,true_x,true_y
void write_ground_truth_csv(std::ostream& out, std::span<const GroundTruthRow> rows);
std::vector<GroundTruthRow> read_ground_truth_csv(std::istream& in);

/// Scene JSON (schema documented in the README).
SyntheticScene scene_from_json_text(const std::string& text);
SyntheticScene load_scene_file(const std::filesystem::path& path);
std::string scene_to_json_text(const SyntheticScene& scene);

/// Canned benchmark scenes used by tests, benchmarks, and documentation.
enum class BenchmarkProfile { Clean, NoisyLight, NoisyMedium, NoisyHeavy };
SyntheticScene benchmark_scene(BenchmarkProfile profile, std::uint64_t seed);

} // namespace evgrasp
