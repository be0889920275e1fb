#include "evgrasp/grasp_io.hpp"

#include <istream>
#include <map>
#include <ostream>

#include <json.hpp>

#include "evgrasp/errors.hpp"

namespace evgrasp {

namespace {

using nlohmann::json;

json rect_to_json(const GraspRect& r) {
    return {{"cx", r.center.x},
            {"cy", r.center.y},
            {"w", r.width},
            {"h", r.height},
            {"theta_deg", r.theta_deg}};
}

GraspRect rect_from_json(const json& j) {
    GraspRect r;
    r.center = {j.at("cx").get<double>(), j.at("cy").get<double>()};
    r.width = j.at("w").get<double>();
    r.height = j.at("h").get<double>();
    r.theta_deg = j.at("theta_deg").get<double>();
    return r;
}

json parse_line(const std::string& line, std::size_t lineno) {
    try {
        return json::parse(line);
    } catch (const json::exception& e) {
        throw ParseError(std::string("JSONL: ") + e.what(), lineno);
    }
}

} // namespace

void write_annotations_jsonl(std::ostream& out, std::span<const AnnotationRecord> records) {
    for (const AnnotationRecord& rec : records) {
        json j;
        j["t_us"] = rec.rect.t_us;
        j["label"] = rec.rect.label == GraspLabel::Bad ? "bad" : "good";
        j["rect"] = rect_to_json(rec.rect);
        if (rec.corners) {
            json c = json::array();
            for (const Vec2& v : *rec.corners) c.push_back({v.x, v.y});
            j["corners"] = c;
        }
        if (!rec.sample_id.empty()) j["sample_id"] = rec.sample_id;
        if (!rec.object_id.empty()) j["object_id"] = rec.object_id;
        out << j.dump() << '\n';
    }
}

std::vector<AnnotationRecord> read_annotations_jsonl(std::istream& in) {
    std::vector<AnnotationRecord> records;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const json j = parse_line(line, lineno);
        try {
            AnnotationRecord rec;
            rec.rect = rect_from_json(j.at("rect"));
            rec.rect.t_us = j.value("t_us", std::uint64_t(0));
            rec.rect.label =
                j.value("label", std::string("good")) == "bad" ? GraspLabel::Bad : GraspLabel::Good;
            if (j.contains("corners")) {
                std::array<Vec2, 4> c{};
                const json& cj = j["corners"];
                if (!cj.is_array() || cj.size() != 4) {
                    throw ParseError("corners must hold 4 points", lineno);
                }
                for (std::size_t i = 0; i < 4; ++i) {
                    c[i] = {cj[i][0].get<double>(), cj[i][1].get<double>()};
                }
                rec.corners = c;
            }
            rec.sample_id = j.value("sample_id", std::string());
            rec.object_id = j.value("object_id", std::string());
            records.push_back(std::move(rec));
        } catch (const json::exception& e) {
            throw ParseError(std::string("annotation record: ") + e.what(), lineno);
        }
    }
    return records;
}

void write_predictions_jsonl(std::ostream& out, std::span<const PredictionRecord> records) {
    for (const PredictionRecord& rec : records) {
        json j;
        j["sample_id"] = rec.sample_id;
        j["object_id"] = rec.object_id;
        j["score"] = rec.score;
        j["rect"] = rect_to_json(rec.rect);
        out << j.dump() << '\n';
    }
}

std::vector<PredictionRecord> read_predictions_jsonl(std::istream& in) {
    std::vector<PredictionRecord> records;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const json j = parse_line(line, lineno);
        try {
            PredictionRecord rec;
            rec.sample_id = j.at("sample_id").is_string()
                                ? j.at("sample_id").get<std::string>()
                                : j.at("sample_id").dump();
            rec.object_id = j.value("object_id", std::string());
            rec.score = j.value("score", 0.0);
            rec.rect = rect_from_json(j.at("rect"));
            records.push_back(std::move(rec));
        } catch (const json::exception& e) {
            throw ParseError(std::string("prediction record: ") + e.what(), lineno);
        }
    }
    return records;
}

std::vector<EvalSample> build_eval_samples(std::span<const PredictionRecord> predictions,
                                           std::span<const AnnotationRecord> truths) {
    std::map<std::string, EvalSample> by_sample;

    const auto truth_key = [](const AnnotationRecord& a) {
        return a.sample_id.empty() ? std::to_string(a.rect.t_us) : a.sample_id;
    };

    for (const AnnotationRecord& a : truths) {
        EvalSample& s = by_sample[truth_key(a)];
        s.sample_id = truth_key(a);
        if (s.object_id.empty()) s.object_id = a.object_id;
        s.truths.push_back(a.rect);
    }
    for (const PredictionRecord& p : predictions) {
        EvalSample& s = by_sample[p.sample_id];
        s.sample_id = p.sample_id;
        if (s.object_id.empty()) s.object_id = p.object_id;
        s.predictions.push_back({p.rect, p.score, 0});
    }

    std::vector<EvalSample> out;
    out.reserve(by_sample.size());
    for (auto& [_, s] : by_sample) out.push_back(std::move(s));
    return out;
}

} // namespace evgrasp
