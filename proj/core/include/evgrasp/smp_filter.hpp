#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

#include "evgrasp/event.hpp"
#include "evgrasp/geometry.hpp"
#include "evgrasp/window.hpp"

namespace evgrasp {

/// Identity and blink statistics of one LED marker.
struct MarkerSpec {
    int id = 1;                       // 1..4, fixed gripper corner assignment
    double period_us = 3000.0;        // mean blink period
    double period_sigma_us = 100.0;   // period spread used by the evidence kernel
};

/// The four blink periods used throughout: {3000, 3800, 4400, 5000} us.
std::vector<MarkerSpec> default_markers();

struct Particle {
    Vec2 position;
    double weight = 0.0;
};

struct ParticleSet {
    int marker_id = 0;
    std::vector<Particle> particles;

    std::size_t size() const { return particles.size(); }
    void reset_uniform_weights();
    double weight_sum() const;
};

struct FilterConfig {
    double alpha = 1.0;               // spatial/temporal evidence ratio
    double proposal_sigma_px = 2.0;   // isotropic proposal noise
    double reselect_threshold = 0.0;  // <= 0: derived per marker, see derived_reselect_threshold
    double resample_fraction = 0.5;   // Th_eff: resample when N_eff < Th_eff * N_s
    int min_events_per_pixel = 3;     // temporal-evidence gate
    int particle_count = 1000;        // N_s
    double covariance_epsilon = 1e-6; // px^2 regularizer for the evidence Gaussian
    std::uint64_t seed = 0;
};

/// Default reselection threshold: the evidence mass of ~10 peak interval hits.
double derived_reselect_threshold(const MarkerSpec& marker);

using Rng = std::mt19937_64;

/// Unit-area isosceles triangle on the base [mu - 2.5 sigma, mu + 2.5 sigma];
/// stands in for the narrow Gaussian period likelihood.
double triangle_pdf(double delta, double mu, double sigma);

/// Dense per-pixel evidence with a touched-pixel list so per-cycle clears and
/// scans cost O(active pixels), not O(sensor).
class EvidenceMap {
public:
    EvidenceMap() : values_(kSensorPixels, 0.0) {}

    void clear();
    void add(int x, int y, double v);
    double at(int x, int y) const { return values_[pixel_index(x, y)]; }
    /// Evidence under a continuous position: nearest integer pixel, clamped.
    double at_position(Vec2 p) const;
    double total() const { return total_; }
    /// Scale so the map sums to 1. No-op on an all-zero map.
    void normalize();
    std::span<const int> touched() const { return touched_; }

private:
    std::vector<double> values_;
    std::vector<int> touched_;
    double total_ = 0.0;
};

/// Sum of triangle likelihoods of the window's intervals, per pixel. Pixels
/// seeing fewer than `min_events` raw events in the window contribute nothing.
void temporal_evidence(const WindowView& window, const MarkerSpec& marker, int min_events,
                       EvidenceMap& out);
EvidenceMap temporal_evidence(const WindowView& window, const MarkerSpec& marker,
                              int min_events = 3);

/// Diffuse every particle with isotropic Gaussian noise, clamped to the
/// sensor. Weights are untouched.
void propagate(ParticleSet& set, double sigma_px, Rng& rng);

/// True when the set's summed temporal evidence falls below the threshold,
/// i.e. the particles no longer cover the measurements.
bool check_reselect(const ParticleSet& set, const EvidenceMap& et, double threshold);

/// Redraw all particles from pixels in proportion to their evidence (uniform
/// over the sensor if the map is empty) and reset weights to 1/N_s.
void reselect(ParticleSet& set, const EvidenceMap& et, Rng& rng);

/// Mean and covariance of the pixel distribution under a normalized map.
struct GaussianFit {
    Vec2 mean;
    double cxx = 0.0, cxy = 0.0, cyy = 0.0; // covariance, regularizer included
};
GaussianFit fit_evidence_gaussian(const EvidenceMap& et_normalized, double epsilon = 1e-6);

/// Per-particle Gaussian density under the evidence fit, normalized over the
/// set. An all-zero map yields a uniform result (no spatial information).
void spatial_evidence(const ParticleSet& set, const EvidenceMap& et_normalized, double epsilon,
                      std::vector<double>& out);
std::vector<double> spatial_evidence(const ParticleSet& set, const EvidenceMap& et_normalized,
                                     double epsilon = 1e-6);

/// w_j <- w_j * (ET(x_j) + alpha * ES_j), then renormalize. Returns true when
/// the cycle degenerated (all-zero product) and weights were reset uniform.
bool update_weights(ParticleSet& set, const EvidenceMap& et_normalized,
                    std::span<const double> es, double alpha);

/// N_eff = 1 / sum(w^2); in [1, N_s] for normalized weights.
double effective_count(const ParticleSet& set);

/// Systematic resampling when N_eff < th_eff * N_s. Returns whether it ran.
bool maybe_resample(ParticleSet& set, double th_eff, Rng& rng);
void systematic_resample(ParticleSet& set, Rng& rng);

/// Weighted mean position of the set.
Vec2 estimate_position(const ParticleSet& set);

Vec2 clamp_to_sensor(Vec2 p);

/// One tracker output row; written per marker per cycle.
struct TrackRecord {
    std::uint64_t cycle = 0;
    std::uint64_t t_us = 0; // window center: the time the window's data represents
    int marker_id = 0;
    double x = 0.0;
    double y = 0.0;
    double n_eff = 0.0;     // before any resampling this cycle
    bool reselected = false;
    bool resampled = false;
    bool degenerate = false;
};

/// Spatiotemporal mixed particle filter over four (or fewer) markers.
/// Feed consecutive 1 ms-step windows; cycle k+1 must follow cycle k.
class SmpTracker {
public:
    explicit SmpTracker(std::vector<MarkerSpec> markers = default_markers(),
                        FilterConfig cfg = {});

    /// Run one full cycle; returns one record per marker (storage reused
    /// across calls).
    std::span<const TrackRecord> track_cycle(const WindowView& window);

    std::size_t marker_count() const { return states_.size(); }
    const MarkerSpec& marker(std::size_t i) const { return states_[i].spec; }
    const ParticleSet& particles(std::size_t i) const { return states_[i].set; }
    Vec2 position(std::size_t i) const { return states_[i].tracked; }
    std::uint64_t cycles_run() const { return cycle_; }
    const FilterConfig& config() const { return cfg_; }

private:
    struct MarkerState {
        MarkerSpec spec;
        ParticleSet set;
        Vec2 tracked;
        double threshold = 0.0;
        Rng rng;
        EvidenceMap et;
    };

    FilterConfig cfg_;
    std::vector<MarkerState> states_;
    std::uint64_t cycle_ = 0;
    std::vector<double> es_buf_;
    std::vector<TrackRecord> records_;
};

/// Track-log CSV: cycle,t_us,marker_id,x,y,n_eff,reselected,resampled
void write_track_csv(std::ostream& out, std::span<const TrackRecord> records);
std::vector<TrackRecord> read_track_csv(std::istream& in);

/// Benchmark failure rule: counts marker pairs whose tracked positions stay
/// within `dist_px` of each other for more than `max_cycles` consecutive
/// cycles anywhere in the log.
int count_tracking_failures(std::span<const TrackRecord> log, double dist_px = 2.0,
                            int max_cycles = 100);

} // namespace evgrasp
