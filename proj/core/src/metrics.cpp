#include "evgrasp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "evgrasp/errors.hpp"

namespace evgrasp {

namespace {

// perimeter-ordered (counterclockwise) corners of an oriented rectangle
std::array<Vec2, 4> perimeter(const GraspRect& r) {
    const auto c = r.corners();
    return {c[0], c[1], c[3], c[2]};
}

double polygon_area(std::span<const Vec2> poly) {
    double acc = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % poly.size()];
        acc += a.cross(b);
    }
    return std::abs(acc) / 2.0;
}

// Sutherland-Hodgman, convex clip polygon in counterclockwise order
std::vector<Vec2> clip_convex(std::span<const Vec2> subject, std::span<const Vec2> clip) {
    std::vector<Vec2> output(subject.begin(), subject.end());
    std::vector<Vec2> input;
    for (std::size_t e = 0; e < clip.size() && !output.empty(); ++e) {
        const Vec2 c1 = clip[e];
        const Vec2 c2 = clip[(e + 1) % clip.size()];
        const Vec2 edge = c2 - c1;
        input = std::move(output);
        output.clear();
        for (std::size_t i = 0; i < input.size(); ++i) {
            const Vec2 s = input[i];
            const Vec2 t = input[(i + 1) % input.size()];
            const double side_s = edge.cross(s - c1);
            const double side_t = edge.cross(t - c1);
            const bool in_s = side_s >= 0.0;
            const bool in_t = side_t >= 0.0;
            if (in_s != in_t) {
                const double f = side_s / (side_s - side_t);
                output.push_back(s + (t - s) * f);
            }
            if (in_t) output.push_back(t);
        }
    }
    return output;
}

} // namespace

double jaccard(const GraspRect& a, const GraspRect& b) {
    if (a.width <= 0 || a.height <= 0 || b.width <= 0 || b.height <= 0) {
        throw ValidationError("jaccard requires non-degenerate rectangles");
    }
    const auto pa = perimeter(a);
    const auto pb = perimeter(b);
    const double inter = polygon_area(clip_convex(pa, pb));
    const double area_a = a.width * a.height;
    const double area_b = b.width * b.height;
    const double uni = area_a + area_b - inter;
    if (uni <= 0.0) return 0.0;
    return std::clamp(inter / uni, 0.0, 1.0);
}

double angle_diff(double theta_p_deg, double theta_t_deg) {
    const double d = std::abs(normalize_angle_deg(theta_p_deg) - normalize_angle_deg(theta_t_deg));
    return std::min(d, 180.0 - d);
}

bool is_correct(const GraspRect& pred, const GraspRect& truth, const EvalConfig& cfg) {
    if (angle_diff(pred.theta_deg, truth.theta_deg) >= cfg.angle_threshold_deg) return false;
    return jaccard(pred, truth) > cfg.jaccard_threshold;
}

int angle_to_class(double theta_deg, int num_classes) {
    if (num_classes < 1) throw ConfigError("need at least one angle class");
    if (theta_deg < 0.0 || theta_deg >= 180.0) {
        throw ValidationError("angle must lie in [0, 180)");
    }
    const int bin = int(std::floor(theta_deg * double(num_classes) / 180.0));
    return std::min(bin, num_classes - 1) + 1;
}

double class_to_angle(int label, int num_classes) {
    if (num_classes < 1) throw ConfigError("need at least one angle class");
    if (label == 0) throw ValidationError("label 0 is non-grasp and carries no angle");
    if (label < 1 || label > num_classes) throw ValidationError("label out of range");
    return (double(label) - 0.5) * 180.0 / double(num_classes);
}

double smooth_l1(double d) {
    const double a = std::abs(d);
    return a < 1.0 ? 0.5 * d * d : a - 0.5;
}

double smooth_l1_loss(std::span<const std::array<double, 4>> offsets_pred,
                      std::span<const std::array<double, 4>> offsets_gt,
                      const std::vector<bool>& positive_mask) {
    if (offsets_pred.size() != offsets_gt.size() || offsets_pred.size() != positive_mask.size()) {
        throw ConfigError("offset lists and mask must have equal length");
    }
    double loss = 0.0;
    for (std::size_t i = 0; i < offsets_pred.size(); ++i) {
        if (!positive_mask[i]) continue;
        for (int m = 0; m < 4; ++m) loss += smooth_l1(offsets_pred[i][m] - offsets_gt[i][m]);
    }
    return loss;
}

double softmax_cls_loss(std::span<const std::vector<double>> class_scores,
                        std::span<const int> assignments) {
    if (class_scores.size() != assignments.size()) {
        throw ConfigError("scores and assignments must have equal length");
    }
    double loss = 0.0;
    for (std::size_t i = 0; i < class_scores.size(); ++i) {
        const std::vector<double>& s = class_scores[i];
        const int label = assignments[i];
        if (label < 0 || label >= int(s.size())) throw ValidationError("assignment out of range");
        const double mx = *std::max_element(s.begin(), s.end());
        double denom = 0.0;
        for (double v : s) denom += std::exp(v - mx);
        loss -= (s[label] - mx) - std::log(denom);
    }
    return loss;
}

double total_loss(double cls_loss, double reg_loss, int positive_count, double alpha) {
    if (positive_count <= 0) return 0.0;
    return (cls_loss + alpha * reg_loss) / double(positive_count);
}

std::vector<std::size_t> select_test_indices(std::span<const EvalSample> samples,
                                             const SplitSpec& split) {
    const std::size_t n = samples.size();
    if (n == 0) return {};
    if (split.test_fraction <= 0.0 || split.test_fraction > 1.0) {
        throw ConfigError("test_fraction must be in (0, 1]");
    }
    const std::size_t want =
        std::clamp<std::size_t>(std::size_t(std::llround(split.test_fraction * double(n))), 1, n);
    std::mt19937_64 rng(split.seed);

    if (split.mode == SplitMode::ImageWise) {
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::shuffle(idx.begin(), idx.end(), rng);
        idx.resize(want);
        std::sort(idx.begin(), idx.end());
        return idx;
    }

    // object-wise: whole objects go to one side
    std::vector<std::string> objects;
    for (const EvalSample& s : samples) {
        if (std::find(objects.begin(), objects.end(), s.object_id) == objects.end()) {
            objects.push_back(s.object_id);
        }
    }
    if (objects.size() < 2) {
        throw SplitError("object-wise split needs at least two distinct objects");
    }
    std::shuffle(objects.begin(), objects.end(), rng);

    std::set<std::string> test_objects;
    std::size_t covered = 0;
    for (const std::string& obj : objects) {
        if (covered >= want) break;
        test_objects.insert(obj);
        for (const EvalSample& s : samples) {
            if (s.object_id == obj) ++covered;
        }
    }
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i) {
        if (test_objects.count(samples[i].object_id)) idx.push_back(i);
    }
    return idx;
}

EvalReport evaluate(std::span<const EvalSample> samples, const SplitSpec& split,
                    const EvalConfig& cfg) {
    const std::vector<std::size_t> test_idx = select_test_indices(samples, split);

    EvalReport report;
    report.test_count = test_idx.size();
    report.train_count = samples.size() - test_idx.size();

    const auto accuracy_at = [&](double j_th, double a_th) {
        if (test_idx.empty()) return 0.0;
        EvalConfig local = cfg;
        local.jaccard_threshold = j_th;
        local.angle_threshold_deg = a_th;
        std::size_t correct = 0;
        for (std::size_t i : test_idx) {
            const EvalSample& s = samples[i];
            if (s.predictions.empty() || s.truths.empty()) continue;
            const auto top = std::max_element(
                s.predictions.begin(), s.predictions.end(),
                [](const GraspPrediction& a, const GraspPrediction& b) { return a.score < b.score; });
            for (const GraspRect& t : s.truths) {
                if (is_correct(top->rect, t, local)) {
                    ++correct;
                    break;
                }
            }
        }
        return double(correct) / double(test_idx.size());
    };

    report.accuracy = accuracy_at(cfg.jaccard_threshold, cfg.angle_threshold_deg);
    for (double j_th : cfg.jaccard_grid) {
        for (double a_th : cfg.angle_grid_deg) {
            report.grid.push_back({j_th, a_th, accuracy_at(j_th, a_th)});
        }
    }
    return report;
}

} // namespace evgrasp
