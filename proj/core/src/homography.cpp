#include "evgrasp/homography.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>

#include "evgrasp/errors.hpp"

namespace evgrasp {

namespace {

using Mat3 = Eigen::Matrix3d;

struct Normalization {
    Mat3 transform;
    bool degenerate = false;
};

// translate centroid to origin, scale mean distance to sqrt(2)
Normalization normalizing_transform(std::span<const Vec2> pts, std::span<const int> idx) {
    double cx = 0, cy = 0;
    for (int i : idx) {
        cx += pts[i].x;
        cy += pts[i].y;
    }
    cx /= double(idx.size());
    cy /= double(idx.size());
    double mean_dist = 0;
    for (int i : idx) mean_dist += std::hypot(pts[i].x - cx, pts[i].y - cy);
    mean_dist /= double(idx.size());

    Normalization n;
    if (mean_dist < 1e-12) {
        n.degenerate = true;
        mean_dist = 1.0;
    }
    const double s = std::sqrt(2.0) / mean_dist;
    n.transform << s, 0, -s * cx, 0, s, -s * cy, 0, 0, 1;
    return n;
}

// Direct linear transform over the selected correspondences. Returns false
// when the system is rank deficient (collinear input).
bool dlt(std::span<const Vec2> src, std::span<const Vec2> dst, std::span<const int> idx,
         Mat3& out) {
    const Normalization ns = normalizing_transform(src, idx);
    const Normalization nd = normalizing_transform(dst, idx);
    if (ns.degenerate || nd.degenerate) return false;

    Eigen::MatrixXd a(2 * idx.size(), 9);
    for (std::size_t r = 0; r < idx.size(); ++r) {
        const int i = idx[r];
        const Eigen::Vector3d p = ns.transform * Eigen::Vector3d(src[i].x, src[i].y, 1.0);
        const Eigen::Vector3d q = nd.transform * Eigen::Vector3d(dst[i].x, dst[i].y, 1.0);
        a.row(2 * r) << 0, 0, 0, -p.x(), -p.y(), -1, q.y() * p.x(), q.y() * p.y(), q.y();
        a.row(2 * r + 1) << p.x(), p.y(), 1, 0, 0, 0, -q.x() * p.x(), -q.x() * p.y(), -q.x();
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    // with 4 exact points the 9th singular value is ~0; rank < 8 means the
    // sample cannot pin down a homography
    if (sv.size() >= 8 && sv(7) < 1e-9 * sv(0)) return false;

    Eigen::VectorXd h = svd.matrixV().col(8);
    Mat3 hn;
    hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
    const Mat3 g = nd.transform.inverse() * hn * ns.transform;
    if (std::abs(g(2, 2)) < 1e-15) return false;
    out = g / g(2, 2);
    return true;
}

double reprojection_error(const Mat3& g, Vec2 s, Vec2 d) {
    const Eigen::Vector3d q = g * Eigen::Vector3d(s.x, s.y, 1.0);
    if (std::abs(q.z()) < 1e-12) return std::numeric_limits<double>::infinity();
    return std::hypot(q.x() / q.z() - d.x, q.y() / q.z() - d.y);
}

bool sample_collinear(std::span<const Vec2> pts, const std::array<int, 4>& idx) {
    for (int drop = 0; drop < 4; ++drop) {
        Vec2 tri[3];
        int n = 0;
        for (int k = 0; k < 4; ++k) {
            if (k != drop) tri[n++] = pts[idx[k]];
        }
        const double area2 = (tri[1] - tri[0]).cross(tri[2] - tri[0]);
        if (std::abs(area2) < 1e-9) return true;
    }
    return false;
}

} // namespace

Vec2 PlanarMap::apply(Vec2 p) const {
    const double w = m[2][0] * p.x + m[2][1] * p.y + m[2][2];
    if (w <= 0.0) {
        throw ValidationError("projected point has non-positive homogeneous component");
    }
    return {(m[0][0] * p.x + m[0][1] * p.y + m[0][2]) / w,
            (m[1][0] * p.x + m[1][1] * p.y + m[1][2]) / w};
}

PlanarMap estimate_map(std::span<const Vec2> src, std::span<const Vec2> dst,
                       const RansacConfig& cfg) {
    if (src.size() != dst.size()) throw ConfigError("correspondence lists differ in size");
    const int n = int(src.size());
    if (n < 4) throw EstimationError("need at least 4 correspondences");

    std::mt19937_64 rng(cfg.seed);
    std::uniform_int_distribution<int> pick(0, n - 1);

    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;

    Mat3 best_model;
    int best_count = -1;
    std::vector<char> best_mask(n, 0);

    int iterations = cfg.max_iterations;
    bool any_model = false;
    for (int it = 0; it < iterations; ++it) {
        std::array<int, 4> sample{};
        if (n == 4) {
            sample = {0, 1, 2, 3};
            it = iterations; // single deterministic attempt
        } else {
            do {
                for (int& s : sample) s = pick(rng);
            } while (sample[0] == sample[1] || sample[0] == sample[2] || sample[0] == sample[3] ||
                     sample[1] == sample[2] || sample[1] == sample[3] || sample[2] == sample[3]);
        }
        if (sample_collinear(src, sample) || sample_collinear(dst, sample)) continue;

        Mat3 g;
        if (!dlt(src, dst, sample, g)) continue;
        any_model = true;

        int count = 0;
        std::vector<char> mask(n, 0);
        for (int i = 0; i < n; ++i) {
            if (reprojection_error(g, src[i], dst[i]) <= cfg.inlier_threshold_px) {
                mask[i] = 1;
                ++count;
            }
        }
        if (count > best_count) {
            best_count = count;
            best_model = g;
            best_mask = mask;
            // adaptive iteration bound
            const double w = double(count) / double(n);
            const double p_outlier_free = std::pow(w, 4);
            if (p_outlier_free > 1e-9 && p_outlier_free < 1.0) {
                const int needed =
                    int(std::ceil(std::log(1.0 - cfg.confidence) / std::log(1.0 - p_outlier_free)));
                iterations = std::min(iterations, std::max(it + 1, needed));
            }
        }
    }

    if (!any_model) throw EstimationError("rank-deficient correspondences (collinear points)");
    if (best_count < 4) throw EstimationError("fewer than 4 RANSAC inliers");

    // refit on all inliers
    std::vector<int> inlier_idx;
    for (int i = 0; i < n; ++i) {
        if (best_mask[i]) inlier_idx.push_back(i);
    }
    Mat3 refit;
    if (dlt(src, dst, inlier_idx, refit)) best_model = refit;

    PlanarMap map;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) map.m[r][c] = best_model(r, c);
    }
    if (std::abs(best_model.determinant()) < 1e-12) {
        throw EstimationError("estimated map is singular");
    }
    map.inliers.assign(best_mask.begin(), best_mask.end());
    return map;
}

std::vector<GraspRect> propagate_rects(std::span<const GraspRect> rects, const PlanarMap& map) {
    std::vector<GraspRect> out;
    out.reserve(rects.size());
    for (const GraspRect& rect : rects) {
        const std::array<Vec2, 4> corners = rect.corners();
        std::array<Vec2, 4> mapped;
        for (std::size_t i = 0; i < 4; ++i) mapped[i] = map.apply(corners[i]);
        GraspQuad quad{mapped, rect.label, rect.t_us};
        out.push_back(quad_to_rect(quad));
    }
    return out;
}

} // namespace evgrasp
