#include "evgrasp/smp_filter.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <string>

#include "evgrasp/errors.hpp"

namespace evgrasp {

namespace {

// splitmix64, used to derive independent per-marker RNG streams from one seed
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

} // namespace

std::vector<MarkerSpec> default_markers() {
    return {
        {1, 3000.0, 100.0},
        {2, 3800.0, 100.0},
        {3, 4400.0, 100.0},
        {4, 5000.0, 100.0},
    };
}

void ParticleSet::reset_uniform_weights() {
    if (particles.empty()) return;
    const double w = 1.0 / double(particles.size());
    for (Particle& p : particles) p.weight = w;
}

double ParticleSet::weight_sum() const {
    double s = 0.0;
    for (const Particle& p : particles) s += p.weight;
    return s;
}

double derived_reselect_threshold(const MarkerSpec& marker) {
    return 10.0 * (2.0 / (5.0 * marker.period_sigma_us));
}

double triangle_pdf(double delta, double mu, double sigma) {
    if (sigma <= 0.0) throw ConfigError("triangle_pdf requires sigma > 0");
    const double half_base = 2.5 * sigma;
    const double d = std::abs(delta - mu);
    if (d >= half_base) return 0.0;
    const double peak = 2.0 / (5.0 * sigma); // unit area over the 5-sigma base
    return peak * (1.0 - d / half_base);
}

void EvidenceMap::clear() {
    for (int idx : touched_) values_[idx] = 0.0;
    touched_.clear();
    total_ = 0.0;
}

void EvidenceMap::add(int x, int y, double v) {
    const int idx = pixel_index(x, y);
    if (values_[idx] == 0.0 && v != 0.0) touched_.push_back(idx);
    values_[idx] += v;
    total_ += v;
}

double EvidenceMap::at_position(Vec2 p) const {
    const int x = std::clamp(int(std::lround(p.x)), 0, kSensorWidth - 1);
    const int y = std::clamp(int(std::lround(p.y)), 0, kSensorHeight - 1);
    return values_[pixel_index(x, y)];
}

void EvidenceMap::normalize() {
    if (total_ <= 0.0) return;
    const double inv = 1.0 / total_;
    for (int idx : touched_) values_[idx] *= inv;
    total_ = 1.0;
}

void temporal_evidence(const WindowView& window, const MarkerSpec& marker, int min_events,
                       EvidenceMap& out) {
    out.clear();
    for (const TransitionInterval& iv : window.intervals()) {
        if (int(window.events_at(iv.x, iv.y)) < min_events) continue; // gate, then accumulate
        const double p = triangle_pdf(double(iv.delta), marker.period_us, marker.period_sigma_us);
        if (p > 0.0) out.add(iv.x, iv.y, p);
    }
}

EvidenceMap temporal_evidence(const WindowView& window, const MarkerSpec& marker,
                              int min_events) {
    EvidenceMap map;
    temporal_evidence(window, marker, min_events, map);
    return map;
}

Vec2 clamp_to_sensor(Vec2 p) {
    return {std::clamp(p.x, 0.0, double(kSensorWidth - 1)),
            std::clamp(p.y, 0.0, double(kSensorHeight - 1))};
}

void propagate(ParticleSet& set, double sigma_px, Rng& rng) {
    if (sigma_px <= 0.0) return;
    std::normal_distribution<double> noise(0.0, sigma_px);
    for (Particle& p : set.particles) {
        p.position = clamp_to_sensor({p.position.x + noise(rng), p.position.y + noise(rng)});
    }
}

bool check_reselect(const ParticleSet& set, const EvidenceMap& et, double threshold) {
    double sum = 0.0;
    for (const Particle& p : set.particles) sum += et.at_position(p.position);
    return sum < threshold;
}

void reselect(ParticleSet& set, const EvidenceMap& et, Rng& rng) {
    const std::size_t n = set.size();
    if (et.total() > 0.0) {
        // cumulative mass over evidence-bearing pixels
        std::vector<double> cum;
        std::vector<int> pixels;
        cum.reserve(et.touched().size());
        pixels.reserve(et.touched().size());
        double acc = 0.0;
        for (int idx : et.touched()) {
            const double v = et.at(idx % kSensorWidth, idx / kSensorWidth);
            if (v <= 0.0) continue;
            acc += v;
            cum.push_back(acc);
            pixels.push_back(idx);
        }
        std::uniform_real_distribution<double> u(0.0, acc);
        for (Particle& p : set.particles) {
            const auto it = std::lower_bound(cum.begin(), cum.end(), u(rng));
            const int idx = pixels[std::min<std::size_t>(it - cum.begin(), pixels.size() - 1)];
            p.position = {double(idx % kSensorWidth), double(idx / kSensorWidth)};
        }
    } else {
        std::uniform_real_distribution<double> ux(0.0, double(kSensorWidth - 1));
        std::uniform_real_distribution<double> uy(0.0, double(kSensorHeight - 1));
        for (Particle& p : set.particles) p.position = {ux(rng), uy(rng)};
    }
    const double w = 1.0 / double(n);
    for (Particle& p : set.particles) p.weight = w;
}

GaussianFit fit_evidence_gaussian(const EvidenceMap& et_normalized, double epsilon) {
    GaussianFit fit;
    double mx = 0.0, my = 0.0;
    for (int idx : et_normalized.touched()) {
        const int x = idx % kSensorWidth;
        const int y = idx / kSensorWidth;
        const double v = et_normalized.at(x, y);
        mx += v * x;
        my += v * y;
    }
    fit.mean = {mx, my};
    double cxx = 0.0, cxy = 0.0, cyy = 0.0;
    for (int idx : et_normalized.touched()) {
        const int x = idx % kSensorWidth;
        const int y = idx / kSensorWidth;
        const double v = et_normalized.at(x, y);
        const double dx = x - mx;
        const double dy = y - my;
        cxx += v * dx * dx;
        cxy += v * dx * dy;
        cyy += v * dy * dy;
    }
    fit.cxx = cxx + epsilon;
    fit.cxy = cxy;
    fit.cyy = cyy + epsilon;
    return fit;
}

void spatial_evidence(const ParticleSet& set, const EvidenceMap& et_normalized, double epsilon,
                      std::vector<double>& out) {
    const std::size_t n = set.size();
    out.assign(n, 0.0);
    if (n == 0) return;
    if (et_normalized.total() <= 0.0) {
        std::fill(out.begin(), out.end(), 1.0 / double(n));
        return;
    }
    const GaussianFit fit = fit_evidence_gaussian(et_normalized, epsilon);
    const double det = fit.cxx * fit.cyy - fit.cxy * fit.cxy;
    const double inv_xx = fit.cyy / det;
    const double inv_xy = -fit.cxy / det;
    const double inv_yy = fit.cxx / det;
    const double norm = 1.0 / (2.0 * std::numbers::pi * std::sqrt(det));

    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const Vec2 d = set.particles[j].position - fit.mean;
        const double q = d.x * (inv_xx * d.x + inv_xy * d.y) + d.y * (inv_xy * d.x + inv_yy * d.y);
        const double dens = norm * std::exp(-0.5 * q);
        out[j] = dens;
        sum += dens;
    }
    if (sum > 0.0) {
        const double inv = 1.0 / sum;
        for (double& v : out) v *= inv;
    }
}

std::vector<double> spatial_evidence(const ParticleSet& set, const EvidenceMap& et_normalized,
                                     double epsilon) {
    std::vector<double> out;
    spatial_evidence(set, et_normalized, epsilon, out);
    return out;
}

bool update_weights(ParticleSet& set, const EvidenceMap& et_normalized,
                    std::span<const double> es, double alpha) {
    double sum = 0.0;
    for (std::size_t j = 0; j < set.size(); ++j) {
        Particle& p = set.particles[j];
        const double like = et_normalized.at_position(p.position) + alpha * es[j];
        p.weight *= like;
        sum += p.weight;
    }
    if (sum <= 0.0 || !std::isfinite(sum)) {
        set.reset_uniform_weights();
        return true;
    }
    const double inv = 1.0 / sum;
    for (Particle& p : set.particles) p.weight *= inv;
    return false;
}

double effective_count(const ParticleSet& set) {
    double s2 = 0.0;
    for (const Particle& p : set.particles) s2 += p.weight * p.weight;
    return s2 > 0.0 ? 1.0 / s2 : 0.0;
}

void systematic_resample(ParticleSet& set, Rng& rng) {
    const std::size_t n = set.size();
    if (n == 0) return;
    std::uniform_real_distribution<double> u(0.0, 1.0 / double(n));
    const double u0 = u(rng);

    std::vector<Vec2> positions(n);
    double cum = set.particles[0].weight;
    std::size_t i = 0;
    for (std::size_t j = 0; j < n; ++j) {
        const double target = u0 + double(j) / double(n);
        while (cum < target && i + 1 < n) cum += set.particles[++i].weight;
        positions[j] = set.particles[i].position;
    }
    for (std::size_t j = 0; j < n; ++j) {
        set.particles[j].position = positions[j];
        set.particles[j].weight = 1.0 / double(n);
    }
}

bool maybe_resample(ParticleSet& set, double th_eff, Rng& rng) {
    if (effective_count(set) >= th_eff * double(set.size())) return false;
    systematic_resample(set, rng);
    return true;
}

Vec2 estimate_position(const ParticleSet& set) {
    Vec2 mean;
    for (const Particle& p : set.particles) mean += p.position * p.weight;
    return mean;
}

SmpTracker::SmpTracker(std::vector<MarkerSpec> markers, FilterConfig cfg) : cfg_(cfg) {
    if (markers.empty()) throw ConfigError("tracker needs at least one marker");
    if (cfg_.particle_count <= 0) throw ConfigError("particle_count must be positive");
    if (cfg_.resample_fraction <= 0.0 || cfg_.resample_fraction > 1.0) {
        throw ConfigError("resample_fraction must be in (0, 1]");
    }

    states_.reserve(markers.size());
    for (std::size_t i = 0; i < markers.size(); ++i) {
        MarkerState st;
        st.spec = markers[i];
        if (st.spec.period_us <= 0.0 || st.spec.period_sigma_us <= 0.0) {
            throw ConfigError("marker period and sigma must be positive");
        }
        st.threshold = cfg_.reselect_threshold > 0.0 ? cfg_.reselect_threshold
                                                     : derived_reselect_threshold(st.spec);
        st.rng.seed(mix_seed(cfg_.seed, i));

        st.set.marker_id = st.spec.id;
        st.set.particles.resize(cfg_.particle_count);
        std::uniform_real_distribution<double> ux(0.0, double(kSensorWidth - 1));
        std::uniform_real_distribution<double> uy(0.0, double(kSensorHeight - 1));
        for (Particle& p : st.set.particles) p.position = {ux(st.rng), uy(st.rng)};
        st.set.reset_uniform_weights();
        st.tracked = estimate_position(st.set);
        states_.push_back(std::move(st));
    }
    records_.resize(states_.size());
}

std::span<const TrackRecord> SmpTracker::track_cycle(const WindowView& window) {
    for (std::size_t i = 0; i < states_.size(); ++i) {
        MarkerState& st = states_[i];
        TrackRecord& rec = records_[i];
        rec = TrackRecord{};
        rec.cycle = cycle_;
        rec.t_us = window.center();
        rec.marker_id = st.spec.id;

        temporal_evidence(window, st.spec, cfg_.min_events_per_pixel, st.et);
        propagate(st.set, cfg_.proposal_sigma_px, st.rng);
        if (check_reselect(st.set, st.et, st.threshold)) {
            reselect(st.set, st.et, st.rng);
            rec.reselected = true;
        }
        st.et.normalize();
        if (st.et.total() <= 0.0) rec.degenerate = true;
        spatial_evidence(st.set, st.et, cfg_.covariance_epsilon, es_buf_);
        rec.degenerate |= update_weights(st.set, st.et, es_buf_, cfg_.alpha);
        rec.n_eff = effective_count(st.set);
        rec.resampled = maybe_resample(st.set, cfg_.resample_fraction, st.rng);
        st.tracked = clamp_to_sensor(estimate_position(st.set));
        rec.x = st.tracked.x;
        rec.y = st.tracked.y;
    }
    ++cycle_;
    return records_;
}

void write_track_csv(std::ostream& out, std::span<const TrackRecord> records) {
    out << "cycle,t_us,marker_id,x,y,n_eff,reselected,resampled\n";
    char buf[160];
    for (const TrackRecord& r : records) {
        std::snprintf(buf, sizeof(buf), "%llu,%llu,%d,%.4f,%.4f,%.2f,%d,%d\n",
                      (unsigned long long)r.cycle, (unsigned long long)r.t_us, r.marker_id, r.x,
                      r.y, r.n_eff, r.reselected ? 1 : 0, r.resampled ? 1 : 0);
        out << buf;
    }
}

std::vector<TrackRecord> read_track_csv(std::istream& in) {
    std::vector<TrackRecord> records;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (line.rfind("cycle,", 0) == 0) continue; // header

        TrackRecord r;
        unsigned long long cycle = 0, t_us = 0;
        int reselected = 0, resampled = 0;
        const int got = std::sscanf(line.c_str(), "%llu,%llu,%d,%lf,%lf,%lf,%d,%d", &cycle, &t_us,
                                    &r.marker_id, &r.x, &r.y, &r.n_eff, &reselected, &resampled);
        if (got != 8) throw ParseError("malformed track record", lineno);
        r.cycle = cycle;
        r.t_us = t_us;
        r.reselected = reselected != 0;
        r.resampled = resampled != 0;
        records.push_back(r);
    }
    return records;
}

int count_tracking_failures(std::span<const TrackRecord> log, double dist_px, int max_cycles) {
    // group rows by cycle, then scan pairwise proximity runs
    std::map<int, std::vector<Vec2>> by_marker; // marker id -> positions per cycle order
    std::map<int, std::vector<std::uint64_t>> cycles;
    for (const TrackRecord& r : log) {
        by_marker[r.marker_id].push_back({r.x, r.y});
        cycles[r.marker_id].push_back(r.cycle);
    }
    std::vector<int> ids;
    for (const auto& [id, _] : by_marker) ids.push_back(id);

    int failures = 0;
    for (std::size_t a = 0; a < ids.size(); ++a) {
        for (std::size_t b = a + 1; b < ids.size(); ++b) {
            const auto& pa = by_marker[ids[a]];
            const auto& pb = by_marker[ids[b]];
            const std::size_t n = std::min(pa.size(), pb.size());
            int run = 0;
            bool failed = false;
            for (std::size_t k = 0; k < n && !failed; ++k) {
                if (distance(pa[k], pb[k]) <= dist_px) {
                    if (++run > max_cycles) failed = true;
                } else {
                    run = 0;
                }
            }
            if (failed) ++failures;
        }
    }
    return failures;
}

} // namespace evgrasp
