#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "evgrasp/geometry.hpp"

namespace evgrasp {

enum class GraspLabel : std::uint8_t { Good = 0, Bad = 1 };

/// Period-aligned data intervals for the four recording steps.
struct RecordingSegments {
    struct Step {
        std::uint64_t end_time_us = 0;     // T_end,i
        std::uint64_t n = 0;               // alignment count
        std::uint64_t interval_start = 0;  // T_end,4 - n*T
        std::uint64_t interval_end = 0;    // T_end,4 - (n-1)*T
        bool flagged = false;              // interval extends past this step's end
    };
    std::array<Step, 4> steps;
    std::uint64_t motion_period_us = 0;
};

/// Align one motion period inside each recording step against the stream end:
/// n_i is the smallest integer with T_end,4 - n_i*T <= T_end,i. Intervals that
/// stick out past their step's end are flagged, not clipped.
RecordingSegments align_periods(std::span<const std::uint64_t> step_end_times_us,
                                std::uint64_t motion_period_us,
                                std::uint64_t recording_start_us = 0);

/// Four-vertex grasp parallelogram. Vertices are bound to marker ids 1..4:
/// grasping edges (v1,v2) and (v3,v4), auxiliary edges (v1,v3) and (v2,v4).
struct GraspQuad {
    std::array<Vec2, 4> vertices; // index i holds marker id i+1
    GraspLabel label = GraspLabel::Good;
    std::uint64_t t_us = 0;

    std::array<std::array<Vec2, 2>, 2> grasping_edges() const {
        return {{{vertices[0], vertices[1]}, {vertices[2], vertices[3]}}};
    }
    std::array<std::array<Vec2, 2>, 2> auxiliary_edges() const {
        return {{{vertices[0], vertices[2]}, {vertices[1], vertices[3]}}};
    }
};

/// Oriented grasp rectangle {center, w, h, theta}. Theta in degrees, [0, 180);
/// w spans the grasping edges.
struct GraspRect {
    Vec2 center;
    double width = 0.0;
    double height = 0.0;
    double theta_deg = 0.0;
    GraspLabel label = GraspLabel::Good;
    std::uint64_t t_us = 0;

    /// Corner layout mirrors GraspQuad: [0]/[1] on one grasping edge,
    /// [2]/[3] on the other, ids 1..4.
    std::array<Vec2, 4> corners() const;
};

/// Bind four tracked marker positions (ids 1..4) to a quad. Any two markers
/// closer than 0.5 px are rejected as degenerate.
GraspQuad quad_from_markers(const std::array<Vec2, 4>& marker_positions, GraspLabel label,
                            std::uint64_t t_us);

/// Squares a (noisy) parallelogram into the oriented rectangle with the mean
/// grasping-edge length and direction; the area is preserved for exact
/// parallelograms.
GraspRect quad_to_rect(const GraspQuad& quad);

struct SmootherConfig {
    int particle_count = 500;
    double proposal_sigma_px = 2.0;
    double likelihood_sigma_px = 2.0;
    double alpha = 1.0; // positional/spatial evidence mix, as in the tracker
    double resample_fraction = 0.5;
    std::uint64_t seed = 0;
};

/// Causal particle smoothing of one marker trajectory with the tracker's
/// propagate/weight/resample machinery: a Gaussian positional likelihood
/// around the raw tracked point stands in for the temporal evidence. Output
/// has the same length as the input.
std::vector<Vec2> smooth_tracks(std::span<const Vec2> raw_track, const SmootherConfig& cfg = {});

} // namespace evgrasp
