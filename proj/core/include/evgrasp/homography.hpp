#pragma once

#include <array>
#include <span>
#include <vector>

#include "evgrasp/annotation.hpp"
#include "evgrasp/geometry.hpp"

namespace evgrasp {

/// Composite planar map between two camera views of the LED plane, normalized
/// so m[2][2] = 1. Only the composite is ever estimated; the intrinsics never
/// appear in isolation.
struct PlanarMap {
    std::array<std::array<double, 3>, 3> m{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    std::vector<bool> inliers; // per input correspondence

    Vec2 apply(Vec2 p) const; // throws ValidationError if the point maps behind the plane
};

struct RansacConfig {
    double inlier_threshold_px = 2.0;
    int max_iterations = 1000;
    double confidence = 0.999;
    std::uint64_t seed = 0;
};

/// Estimate the planar map from >= 4 correspondences: RANSAC over normalized
/// DLT minimal fits, then one refit on all inliers.
PlanarMap estimate_map(std::span<const Vec2> src, std::span<const Vec2> dst,
                       const RansacConfig& cfg = {});

/// Map each rectangle's corners through `map` and refit the projected quad.
std::vector<GraspRect> propagate_rects(std::span<const GraspRect> rects, const PlanarMap& map);

} // namespace evgrasp
