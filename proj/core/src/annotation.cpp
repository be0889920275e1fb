#include "evgrasp/annotation.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "evgrasp/errors.hpp"
#include "evgrasp/smp_filter.hpp"

namespace evgrasp {

RecordingSegments align_periods(std::span<const std::uint64_t> step_end_times_us,
                                std::uint64_t motion_period_us,
                                std::uint64_t recording_start_us) {
    if (step_end_times_us.size() != 4) throw ConfigError("expected 4 step end times");
    if (motion_period_us == 0) throw ConfigError("motion period must be positive");
    for (std::size_t i = 1; i < 4; ++i) {
        if (step_end_times_us[i] <= step_end_times_us[i - 1]) {
            throw ConfigError("step end times must be strictly increasing");
        }
    }

    const std::uint64_t t_end4 = step_end_times_us[3];
    const std::uint64_t T = motion_period_us;
    RecordingSegments out;
    out.motion_period_us = T;

    for (std::size_t i = 0; i < 4; ++i) {
        const std::uint64_t step_start = (i == 0) ? recording_start_us : step_end_times_us[i - 1];
        if (step_end_times_us[i] < step_start + T) {
            throw AlignmentError("motion period exceeds the span of step " + std::to_string(i + 1));
        }

        RecordingSegments::Step& step = out.steps[i];
        step.end_time_us = step_end_times_us[i];
        // smallest n with t_end4 - n*T <= end_i
        const std::uint64_t gap = t_end4 - step.end_time_us;
        step.n = (gap + T - 1) / T;
        step.interval_start = t_end4 - step.n * T;
        step.interval_end = step.interval_start + T;
        step.flagged = step.interval_end > step.end_time_us;
    }
    return out;
}

GraspQuad quad_from_markers(const std::array<Vec2, 4>& marker_positions, GraspLabel label,
                            std::uint64_t t_us) {
    for (std::size_t a = 0; a < 4; ++a) {
        if (!std::isfinite(marker_positions[a].x) || !std::isfinite(marker_positions[a].y)) {
            throw ValidationError("marker position is not finite");
        }
        for (std::size_t b = a + 1; b < 4; ++b) {
            if (distance(marker_positions[a], marker_positions[b]) < 0.5) {
                throw ValidationError("degenerate quad: markers " + std::to_string(a + 1) +
                                      " and " + std::to_string(b + 1) + " coincide");
            }
        }
    }
    return GraspQuad{marker_positions, label, t_us};
}

std::array<Vec2, 4> GraspRect::corners() const {
    const double rad = theta_deg * std::numbers::pi / 180.0;
    const Vec2 u{std::cos(rad), std::sin(rad)};  // grasping-edge direction
    const Vec2 n{-u.y, u.x};
    const Vec2 hw = u * (width / 2.0);
    const Vec2 hh = n * (height / 2.0);
    return {center - hw - hh, center + hw - hh, center - hw + hh, center + hw + hh};
}

GraspRect quad_to_rect(const GraspQuad& quad) {
    const Vec2 e1 = quad.vertices[1] - quad.vertices[0];
    const Vec2 e2 = quad.vertices[3] - quad.vertices[2];
    const double len1 = e1.norm();
    const double len2 = e2.norm();
    if (len1 < 0.5 || len2 < 0.5) throw ValidationError("degenerate grasping edge");

    // reconcile both edge directions to one half-turn branch before averaging
    Vec2 d1 = e1 / len1;
    Vec2 d2 = e2 / len2;
    if (d1.dot(d2) < 0.0) d2 = d2 * -1.0;
    Vec2 dir = d1 + d2;
    const double dn = dir.norm();
    if (dn < 1e-12) throw ValidationError("grasping edges are perpendicular, direction undefined");
    dir = dir / dn;

    const Vec2 m1 = (quad.vertices[0] + quad.vertices[1]) / 2.0;
    const Vec2 m2 = (quad.vertices[2] + quad.vertices[3]) / 2.0;
    const Vec2 normal{-dir.y, dir.x};

    GraspRect rect;
    rect.width = (len1 + len2) / 2.0;
    rect.height = std::abs((m2 - m1).dot(normal));
    if (rect.height < 1.0) throw ValidationError("degenerate rectangle: height below 1 px");
    rect.center = (m1 + m2) / 2.0;
    rect.theta_deg = normalize_angle_deg(std::atan2(dir.y, dir.x) * 180.0 / std::numbers::pi);
    rect.label = quad.label;
    rect.t_us = quad.t_us;
    return rect;
}

std::vector<Vec2> smooth_tracks(std::span<const Vec2> raw_track, const SmootherConfig& cfg) {
    std::vector<Vec2> smoothed;
    smoothed.reserve(raw_track.size());
    if (raw_track.empty()) return smoothed;

    ParticleSet set;
    set.particles.resize(cfg.particle_count);
    for (Particle& p : set.particles) p.position = raw_track[0];
    set.reset_uniform_weights();

    Rng rng(cfg.seed);
    const double two_pi = 2.0 * std::numbers::pi;
    const double s2 = cfg.likelihood_sigma_px * cfg.likelihood_sigma_px;
    const double epsilon = 1e-6;
    std::vector<double> es;

    for (const Vec2& z : raw_track) {
        propagate(set, cfg.proposal_sigma_px, rng);

        // same mixed update as the tracker: the raw point's positional
        // Gaussian stands in for the temporal evidence, the cloud-fit
        // density for the spatial term. The spatial term keeps an isolated
        // raw outlier (near-zero positional likelihood everywhere) from
        // handing the whole posterior to one tail particle.
        Vec2 mean;
        for (const Particle& p : set.particles) mean += p.position * p.weight;
        double cxx = epsilon, cxy = 0.0, cyy = epsilon;
        for (const Particle& p : set.particles) {
            const Vec2 d = p.position - mean;
            cxx += p.weight * d.x * d.x;
            cxy += p.weight * d.x * d.y;
            cyy += p.weight * d.y * d.y;
        }
        const double det = cxx * cyy - cxy * cxy;
        const double inv_xx = cyy / det, inv_xy = -cxy / det, inv_yy = cxx / det;
        const double es_norm = 1.0 / (two_pi * std::sqrt(det));

        es.assign(set.size(), 0.0);
        double es_sum = 0.0;
        for (std::size_t j = 0; j < set.size(); ++j) {
            const Vec2 d = set.particles[j].position - mean;
            const double q =
                d.x * (inv_xx * d.x + inv_xy * d.y) + d.y * (inv_xy * d.x + inv_yy * d.y);
            es[j] = es_norm * std::exp(-0.5 * q);
            es_sum += es[j];
        }
        if (es_sum > 0.0) {
            for (double& v : es) v /= es_sum;
        }

        double sum = 0.0;
        for (std::size_t j = 0; j < set.size(); ++j) {
            Particle& p = set.particles[j];
            const double like = std::exp(-(p.position - z).squared_norm() / (2.0 * s2)) /
                                (two_pi * s2);
            p.weight *= like + cfg.alpha * es[j];
            sum += p.weight;
        }
        if (sum <= 0.0 || !std::isfinite(sum)) {
            set.reset_uniform_weights();
        } else {
            for (Particle& p : set.particles) p.weight /= sum;
        }
        maybe_resample(set, cfg.resample_fraction, rng);
        smoothed.push_back(estimate_position(set));
    }
    return smoothed;
}

} // namespace evgrasp
