#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evgrasp/annotation.hpp"
#include "evgrasp/metrics.hpp"

namespace evgrasp {

/// One annotation line:
///   {"t_us":..., "label":"good", "rect":{"cx":..,"cy":..,"w":..,"h":..,"theta_deg":..},
///    "corners":[[x,y]x4]?, "sample_id"?:.., "object_id"?:..}
struct AnnotationRecord {
    GraspRect rect; // carries t_us and label
    std::optional<std::array<Vec2, 4>> corners;
    std::string sample_id; // optional; t_us stands in when empty
    std::string object_id; // optional
};

void write_annotations_jsonl(std::ostream& out, std::span<const AnnotationRecord> records);
std::vector<AnnotationRecord> read_annotations_jsonl(std::istream& in);

/// One prediction line:
///   {"sample_id":.., "object_id":.., "score":.., "rect":{...}}
struct PredictionRecord {
    std::string sample_id;
    std::string object_id;
    double score = 0.0;
    GraspRect rect;
};

void write_predictions_jsonl(std::ostream& out, std::span<const PredictionRecord> records);
std::vector<PredictionRecord> read_predictions_jsonl(std::istream& in);

/// Join predictions with ground-truth annotations by sample id.
std::vector<EvalSample> build_eval_samples(std::span<const PredictionRecord> predictions,
                                           std::span<const AnnotationRecord> truths);

} // namespace evgrasp
