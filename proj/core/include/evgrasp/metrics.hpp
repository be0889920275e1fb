#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "evgrasp/annotation.hpp"

namespace evgrasp {

/// Area intersection-over-union of two oriented rectangles, by convex polygon
/// clipping. Exact up to floating point; in [0, 1].
double jaccard(const GraspRect& a, const GraspRect& b);

/// Smallest rotation between two half-turn angles, in [0, 90] degrees.
double angle_diff(double theta_p_deg, double theta_t_deg);

struct EvalConfig {
    double jaccard_threshold = 0.25;   // correct requires J strictly greater
    double angle_threshold_deg = 30.0; // correct requires |dtheta| strictly smaller
    int angle_classes = 19;            // C; label 0 is reserved for non-grasp
    std::vector<double> jaccard_grid = {0.25, 0.30, 0.35, 0.40};
    std::vector<double> angle_grid_deg = {15.0, 20.0, 25.0, 30.0};
};

/// Rectangle metric: angle within threshold AND Jaccard above threshold.
bool is_correct(const GraspRect& pred, const GraspRect& truth, const EvalConfig& cfg = {});

/// Quantize theta in [0, 180) into C equal bins; labels run 1..C.
int angle_to_class(double theta_deg, int num_classes);

/// Bin-center angle of a class label in 1..C. Label 0 is non-grasp and has no
/// angle.
double class_to_angle(int label, int num_classes);

/// Conventional smooth-L1: 0.5 d^2 below |d| = 1, |d| - 0.5 above.
double smooth_l1(double d);

/// Offset regression loss, summed over positive boxes and the four
/// (cx, cy, w, h) components.
double smooth_l1_loss(std::span<const std::array<double, 4>> offsets_pred,
                      std::span<const std::array<double, 4>> offsets_gt,
                      const std::vector<bool>& positive_mask);

/// Softmax classification loss over |L| = C + 1 labels: positives score their
/// assigned class (>= 1), negatives the background label 0.
double softmax_cls_loss(std::span<const std::vector<double>> class_scores,
                        std::span<const int> assignments);

/// (1/N)(L_c + alpha * L_r); zero positives yields 0.
double total_loss(double cls_loss, double reg_loss, int positive_count, double alpha);

struct GraspPrediction {
    GraspRect rect;
    double score = 0.0;        // in [0, 1]
    int angle_class = 0;       // 0 = non-grasp
};

/// One evaluation sample: the candidate predictions and every acceptable
/// ground-truth rectangle.
struct EvalSample {
    std::string sample_id;
    std::string object_id;
    std::vector<GraspPrediction> predictions;
    std::vector<GraspRect> truths;
};

enum class SplitMode { ImageWise, ObjectWise };

struct SplitSpec {
    SplitMode mode = SplitMode::ImageWise;
    double test_fraction = 0.2; // 1.0 evaluates everything
    std::uint64_t seed = 0;
};

struct EvalReport {
    std::size_t train_count = 0;
    std::size_t test_count = 0;
    double accuracy = 0.0; // at the config's headline thresholds

    struct Cell {
        double jaccard_threshold = 0.0;
        double angle_threshold_deg = 0.0;
        double accuracy = 0.0;
    };
    std::vector<Cell> grid; // full cross of jaccard_grid x angle_grid_deg
};

/// Deterministic test-set selection for the requested seed.
std::vector<std::size_t> select_test_indices(std::span<const EvalSample> samples,
                                             const SplitSpec& split);

/// Accuracy of the top-score prediction against any ground-truth rectangle,
/// over the test partition, swept across the threshold grid.
EvalReport evaluate(std::span<const EvalSample> samples, const SplitSpec& split,
                    const EvalConfig& cfg = {});

} // namespace evgrasp
