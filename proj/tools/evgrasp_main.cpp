// evgrasp: synth / track / encode / annotate / eval / histogram pipelines
// over event-camera streams. Exit codes: 0 ok, 1 finished with warnings,
// 2 usage or I/O error.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <thread>

#include "evgrasp/annotation.hpp"
#include "evgrasp/encoders.hpp"
#include "evgrasp/errors.hpp"
#include "evgrasp/event_io.hpp"
#include "evgrasp/grasp_io.hpp"
#include "evgrasp/homography.hpp"
#include "evgrasp/image_io.hpp"
#include "evgrasp/metrics.hpp"
#include "evgrasp/pipeline.hpp"
#include "evgrasp/smp_filter.hpp"
#include "evgrasp/synth.hpp"
#include "evgrasp/version.hpp"
#include "evgrasp/window.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int g_warnings = 0;

void warn(const std::string& msg) {
    std::cerr << "warning: " << msg << '\n';
    ++g_warnings;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw evgrasp::IoError("cannot open output file: " + path.string());
    return out;
}

void write_manifest(const fs::path& dir, const std::string& subcommand, const json& inputs,
                    const json& outputs, std::uint64_t seed, const json& config) {
    json m;
    m["tool"] = "evgrasp";
    m["version"] = evgrasp::kVersion;
    m["subcommand"] = subcommand;
    m["inputs"] = inputs;
    m["outputs"] = outputs;
    m["seed"] = seed;
    m["config"] = config;
    auto out = open_out(dir / "manifest.json");
    out << m.dump(2) << '\n';
}

// Fill options that were not given on the command line from a JSON config
// object keyed by long option names. Flags always win.
void apply_json_config(CLI::App* cmd, const json& cfg) {
    for (auto& [key, value] : cfg.items()) {
        CLI::Option* opt = cmd->get_option_no_throw("--" + key);
        if (opt == nullptr) {
            warn("config key '" + key + "' does not match an option of " + cmd->get_name());
            continue;
        }
        if (opt->count() > 0) continue; // explicit flag wins
        std::string text;
        if (value.is_string()) {
            text = value.get<std::string>();
        } else {
            text = value.dump();
        }
        opt->add_result(text);
        opt->run_callback();
    }
}

json load_config_file(const std::string& path, const std::string& subcommand) {
    std::ifstream in(path);
    if (!in) throw evgrasp::IoError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw evgrasp::ParseError(std::string("config JSON: ") + e.what());
    }
    // either flat options or nested per-subcommand sections
    if (j.contains(subcommand) && j[subcommand].is_object()) return j[subcommand];
    return j;
}

evgrasp::EventFileFormat parse_format(const std::string& name) {
    if (name == "csv") return evgrasp::EventFileFormat::Csv;
    if (name == "bin") return evgrasp::EventFileFormat::Binary;
    throw evgrasp::ConfigError("unknown event format: " + name);
}

// ---------------------------------------------------------------- synth ----

struct SynthOptions {
    std::string scene_path;
    std::string out_dir;
    std::string format = "csv";
    std::uint64_t seed = 0;
    bool seed_given = false;
};

int run_synth(const SynthOptions& opt) {
    evgrasp::SyntheticScene scene = evgrasp::load_scene_file(opt.scene_path);
    if (opt.seed_given) scene.seed = opt.seed;

    const evgrasp::GeneratedStream stream = evgrasp::generate(scene);
    for (const std::string& w : stream.warnings) warn(w);

    fs::create_directories(opt.out_dir);
    const fs::path dir(opt.out_dir);
    const std::string events_name = opt.format == "bin" ? "events.evb" : "events.csv";
    evgrasp::write_events_file(dir / events_name, stream.events, parse_format(opt.format));
    {
        auto out = open_out(dir / "ground_truth.csv");
        evgrasp::write_ground_truth_csv(out, stream.truth.rows);
    }
    json outputs = json::array({events_name, "ground_truth.csv"});
    if (!stream.truth.rects.empty()) {
        std::vector<evgrasp::AnnotationRecord> recs;
        recs.reserve(stream.truth.rects.size());
        for (const evgrasp::GraspRect& r : stream.truth.rects) recs.push_back({r, {}, "", ""});
        auto out = open_out(dir / "truth_rects.jsonl");
        evgrasp::write_annotations_jsonl(out, recs);
        outputs.push_back("truth_rects.jsonl");
    }

    write_manifest(dir, "synth", {{"scene", opt.scene_path}}, outputs, scene.seed,
                   json::parse(evgrasp::scene_to_json_text(scene)));
    std::cout << "synth: " << stream.events.size() << " events, " << stream.truth.rows.size()
              << " ground-truth rows -> " << opt.out_dir << '\n';
    return 0;
}

// ---------------------------------------------------------------- track ----

struct TrackOptions {
    std::string events_path;
    std::string out_dir;
    double alpha = 1.0;
    int particles = 1000;
    double proposal_sigma = 2.0;
    double marker_sigma = 100.0;
    double th_eff = 0.5;
    std::uint64_t window = 10'000;
    std::uint64_t step = 1'000;
    std::vector<double> periods = {3000.0, 3800.0, 4400.0, 5000.0};
    std::uint64_t seed = 0;
};

int run_track(const TrackOptions& opt) {
    const std::vector<evgrasp::Event> events = evgrasp::ingest_file(opt.events_path);
    const evgrasp::PreprocessedStream pre = evgrasp::preprocess(events);

    std::vector<evgrasp::MarkerSpec> markers;
    for (std::size_t i = 0; i < opt.periods.size(); ++i) {
        markers.push_back({int(i + 1), opt.periods[i], opt.marker_sigma});
    }
    evgrasp::FilterConfig cfg;
    cfg.alpha = opt.alpha;
    cfg.particle_count = opt.particles;
    cfg.proposal_sigma_px = opt.proposal_sigma;
    cfg.resample_fraction = opt.th_eff;
    cfg.seed = opt.seed;

    evgrasp::SmpTracker tracker(markers, cfg);
    evgrasp::WindowSequence windows(pre.events, pre.intervals, {opt.window, opt.step, 0, 0});

    fs::create_directories(opt.out_dir);
    auto out = open_out(fs::path(opt.out_dir) / "track.csv");
    out << "cycle,t_us,marker_id,x,y,n_eff,reselected,resampled\n";
    std::uint64_t cycles = 0;
    char buf[160];
    while (auto w = windows.next()) {
        for (const evgrasp::TrackRecord& r : tracker.track_cycle(*w)) {
            std::snprintf(buf, sizeof(buf), "%llu,%llu,%d,%.4f,%.4f,%.2f,%d,%d\n",
                          (unsigned long long)r.cycle, (unsigned long long)r.t_us, r.marker_id,
                          r.x, r.y, r.n_eff, r.reselected ? 1 : 0, r.resampled ? 1 : 0);
            out << buf;
        }
        ++cycles;
    }

    json config = {{"alpha", opt.alpha},           {"particles", opt.particles},
                   {"proposal-sigma", opt.proposal_sigma}, {"marker-sigma", opt.marker_sigma},
                   {"th-eff", opt.th_eff},          {"window", opt.window},
                   {"step", opt.step},              {"periods", opt.periods}};
    write_manifest(opt.out_dir, "track", {{"events", opt.events_path}}, {"track.csv"}, opt.seed,
                   config);
    std::cout << "track: " << cycles << " cycles, " << markers.size() << " markers -> "
              << opt.out_dir << "/track.csv\n";
    return 0;
}

// --------------------------------------------------------------- encode ----

struct EncodeOptions {
    std::string events_path;
    std::string out_dir;
    std::string method = "merged";
    std::uint64_t window = evgrasp::kDatasetWindowUs;
    std::uint64_t step = 0; // 0: same as window
    int threads = 1;
    evgrasp::LifConfig lif;
};

int run_encode(const EncodeOptions& opt) {
    if (opt.method != "freq" && opt.method != "sae" && opt.method != "lif" &&
        opt.method != "merged") {
        throw evgrasp::ConfigError("method must be freq, sae, lif, or merged");
    }
    const std::uint64_t step = opt.step == 0 ? opt.window : opt.step;
    if (step == 0 || opt.window == 0) throw evgrasp::ConfigError("window and step must be positive");
    if (step > opt.window) throw evgrasp::ConfigError("step exceeds window length");

    const std::vector<evgrasp::Event> events = evgrasp::ingest_file(opt.events_path);
    const std::uint64_t t_last = events.empty() ? 0 : events.back().t;
    const std::uint64_t n_windows = t_last / step + 1;

    fs::create_directories(opt.out_dir);
    const fs::path dir(opt.out_dir);

    // per-window event ranges over the sorted stream
    std::vector<std::pair<std::size_t, std::size_t>> ranges(n_windows);
    {
        std::size_t lo = 0, hi = 0;
        for (std::uint64_t k = 0; k < n_windows; ++k) {
            const std::uint64_t start = k * step;
            const std::uint64_t end = start + opt.window;
            while (hi < events.size() && events[hi].t < end) ++hi;
            while (lo < hi && events[lo].t < start) ++lo;
            ranges[k] = {lo, hi};
        }
    }

    const auto encode_window = [&](std::uint64_t k) {
        const std::uint64_t start = k * step;
        const auto [lo, hi] = ranges[k];
        const std::span<const evgrasp::Event> slice(events.data() + lo, hi - lo);
        if (opt.method == "freq") {
            evgrasp::write_pgm(dir / evgrasp::frame_filename("freq", start, "pgm"),
                               evgrasp::encode_frequency(slice, start, opt.window));
        } else if (opt.method == "sae") {
            evgrasp::write_pgm(dir / evgrasp::frame_filename("sae", start, "pgm"),
                               evgrasp::encode_sae(slice, start, opt.window));
        } else if (opt.method == "lif") {
            evgrasp::write_pgm(dir / evgrasp::frame_filename("lif", start, "pgm"),
                               evgrasp::encode_lif(slice, start, opt.window, opt.lif));
        } else {
            auto merged = evgrasp::merge(evgrasp::encode_frequency(slice, start, opt.window),
                                         evgrasp::encode_sae(slice, start, opt.window),
                                         evgrasp::encode_lif(slice, start, opt.window, opt.lif));
            evgrasp::write_ppm(dir / evgrasp::frame_filename("merged", start, "ppm"), merged);
        }
    };

    const int threads = std::max(1, opt.threads);
    if (threads == 1) {
        for (std::uint64_t k = 0; k < n_windows; ++k) encode_window(k);
    } else {
        std::vector<std::thread> pool;
        std::atomic<std::uint64_t> next{0};
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (std::uint64_t k = next++; k < n_windows; k = next++) encode_window(k);
            });
        }
        for (std::thread& t : pool) t.join();
    }

    json config = {{"method", opt.method}, {"window", opt.window}, {"step", step},
                   {"threads", threads},   {"lif-step", opt.lif.step_increase},
                   {"lif-decay", opt.lif.decay_per_ms}, {"lif-threshold", opt.lif.threshold}};
    write_manifest(dir, "encode", {{"events", opt.events_path}},
                   {std::to_string(n_windows) + " frames"}, 0, config);
    std::cout << "encode: " << n_windows << " windows (" << opt.method << ") -> " << opt.out_dir
              << '\n';
    return 0;
}

// -------------------------------------------------------------- annotate ----

struct AnnotateOptions {
    std::string track_path;
    std::string track2_path;
    std::string seed_rects_path;
    std::string out_dir;
    std::string label = "good";
    std::string object_id;
    bool homography = false;
    bool smooth = false;
    std::uint64_t seed = 0;
};

// marker id -> time-ordered positions plus the shared cycle timestamps
struct MarkerTracks {
    std::vector<int> ids;
    std::map<int, std::vector<evgrasp::Vec2>> positions;
    std::vector<std::uint64_t> t_us; // per cycle
};

MarkerTracks load_tracks(const std::string& path, bool smooth, std::uint64_t seed) {
    std::ifstream in(path);
    if (!in) throw evgrasp::IoError("cannot open track log: " + path);
    const std::vector<evgrasp::TrackRecord> records = evgrasp::read_track_csv(in);
    if (records.empty()) throw evgrasp::ValidationError("track log is empty: " + path);

    MarkerTracks tracks;
    std::map<std::uint64_t, std::uint64_t> cycle_time;
    for (const evgrasp::TrackRecord& r : records) {
        if (tracks.positions.find(r.marker_id) == tracks.positions.end()) {
            tracks.ids.push_back(r.marker_id);
        }
        tracks.positions[r.marker_id].push_back({r.x, r.y});
        cycle_time[r.cycle] = r.t_us;
    }
    for (const auto& [cycle, t] : cycle_time) tracks.t_us.push_back(t);

    const std::size_t cycles = tracks.t_us.size();
    for (const auto& [id, pos] : tracks.positions) {
        if (pos.size() != cycles) {
            throw evgrasp::ValidationError("track log has unequal cycle counts per marker");
        }
    }
    if (smooth) {
        evgrasp::SmootherConfig cfg;
        cfg.seed = seed;
        for (int id : tracks.ids) {
            tracks.positions[id] = evgrasp::smooth_tracks(tracks.positions[id], cfg);
        }
    }
    return tracks;
}

int run_annotate(const AnnotateOptions& opt) {
    const evgrasp::GraspLabel label =
        opt.label == "bad" ? evgrasp::GraspLabel::Bad : evgrasp::GraspLabel::Good;
    MarkerTracks tracks = load_tracks(opt.track_path, opt.smooth, opt.seed);

    fs::create_directories(opt.out_dir);
    std::vector<evgrasp::AnnotationRecord> records;
    std::size_t skipped = 0;

    if (!opt.homography) {
        if (tracks.ids.size() != 4) {
            throw evgrasp::ValidationError("per-cycle rectangle annotation needs 4 tracked markers");
        }
        std::sort(tracks.ids.begin(), tracks.ids.end());
        for (std::size_t k = 0; k < tracks.t_us.size(); ++k) {
            std::array<evgrasp::Vec2, 4> quad_pts{};
            for (int id : tracks.ids) quad_pts[id - 1] = tracks.positions[id][k];
            try {
                const evgrasp::GraspQuad quad =
                    evgrasp::quad_from_markers(quad_pts, label, tracks.t_us[k]);
                evgrasp::AnnotationRecord rec;
                rec.rect = evgrasp::quad_to_rect(quad);
                rec.corners = quad.vertices;
                rec.object_id = opt.object_id;
                records.push_back(std::move(rec));
            } catch (const evgrasp::ValidationError& e) {
                ++skipped;
                if (skipped <= 5) warn("cycle " + std::to_string(k) + ": " + e.what());
            }
        }
    } else {
        if (opt.seed_rects_path.empty()) {
            throw evgrasp::ConfigError("homography mode needs --seed-rects");
        }
        std::ifstream seeds_in(opt.seed_rects_path);
        if (!seeds_in) throw evgrasp::IoError("cannot open seed rects: " + opt.seed_rects_path);
        const std::vector<evgrasp::AnnotationRecord> seeds =
            evgrasp::read_annotations_jsonl(seeds_in);
        if (seeds.empty()) throw evgrasp::ValidationError("seed annotation file is empty");

        // a second log (the other grasp recording) doubles the correspondences
        std::vector<MarkerTracks> sources;
        sources.push_back(std::move(tracks));
        if (!opt.track2_path.empty()) {
            sources.push_back(load_tracks(opt.track2_path, opt.smooth, opt.seed + 1));
        }
        const std::size_t cycles = sources[0].t_us.size();
        for (const MarkerTracks& s : sources) {
            if (s.t_us.size() != cycles) {
                throw evgrasp::ValidationError("track logs cover different cycle counts");
            }
        }

        std::vector<evgrasp::GraspRect> seed_rects;
        seed_rects.reserve(seeds.size());
        for (const evgrasp::AnnotationRecord& s : seeds) seed_rects.push_back(s.rect);

        std::vector<evgrasp::Vec2> ref_pts;
        for (const MarkerTracks& s : sources) {
            for (int id : s.ids) ref_pts.push_back(s.positions.at(id)[0]);
        }

        for (std::size_t k = 0; k < cycles; ++k) {
            std::vector<evgrasp::Vec2> cur_pts;
            for (const MarkerTracks& s : sources) {
                for (int id : s.ids) cur_pts.push_back(s.positions.at(id)[k]);
            }
            try {
                evgrasp::RansacConfig rcfg;
                rcfg.seed = opt.seed;
                const evgrasp::PlanarMap map = evgrasp::estimate_map(ref_pts, cur_pts, rcfg);
                for (evgrasp::GraspRect rect : evgrasp::propagate_rects(seed_rects, map)) {
                    rect.t_us = sources[0].t_us[k];
                    evgrasp::AnnotationRecord rec;
                    rec.rect = rect;
                    rec.corners = rect.corners();
                    rec.object_id = opt.object_id;
                    records.push_back(std::move(rec));
                }
            } catch (const evgrasp::Error& e) {
                ++skipped;
                if (skipped <= 5) warn("cycle " + std::to_string(k) + ": " + e.what());
            }
        }
    }

    {
        auto out = open_out(fs::path(opt.out_dir) / "annotations.jsonl");
        evgrasp::write_annotations_jsonl(out, records);
    }
    if (skipped > 0) warn(std::to_string(skipped) + " cycles skipped");

    json inputs = {{"track", opt.track_path}};
    if (!opt.track2_path.empty()) inputs["track2"] = opt.track2_path;
    if (!opt.seed_rects_path.empty()) inputs["seed_rects"] = opt.seed_rects_path;
    json config = {{"label", opt.label},
                   {"homography", opt.homography},
                   {"smooth", opt.smooth},
                   {"object-id", opt.object_id}};
    write_manifest(opt.out_dir, "annotate", inputs, {"annotations.jsonl"}, opt.seed, config);
    std::cout << "annotate: " << records.size() << " records (" << skipped << " skipped) -> "
              << opt.out_dir << "/annotations.jsonl\n";
    return 0;
}

// ----------------------------------------------------------------- eval ----

struct EvalOptions {
    std::string predictions_path;
    std::string annotations_path;
    std::string out_path = "report.json";
    std::string split = "image";
    double test_fraction = 0.2;
    double jaccard = 0.25;
    double angle = 30.0;
    std::vector<double> jaccard_grid = {0.25, 0.30, 0.35, 0.40};
    std::vector<double> angle_grid = {15.0, 20.0, 25.0, 30.0};
    std::uint64_t seed = 0;
};

int run_eval(const EvalOptions& opt) {
    std::ifstream pin(opt.predictions_path);
    if (!pin) throw evgrasp::IoError("cannot open predictions: " + opt.predictions_path);
    std::ifstream ain(opt.annotations_path);
    if (!ain) throw evgrasp::IoError("cannot open annotations: " + opt.annotations_path);

    const auto predictions = evgrasp::read_predictions_jsonl(pin);
    const auto annotations = evgrasp::read_annotations_jsonl(ain);
    const auto samples = evgrasp::build_eval_samples(predictions, annotations);

    evgrasp::SplitSpec split;
    split.mode = opt.split == "object" ? evgrasp::SplitMode::ObjectWise
                                       : evgrasp::SplitMode::ImageWise;
    split.test_fraction = opt.test_fraction;
    split.seed = opt.seed;

    evgrasp::EvalConfig cfg;
    cfg.jaccard_threshold = opt.jaccard;
    cfg.angle_threshold_deg = opt.angle;
    cfg.jaccard_grid = opt.jaccard_grid;
    cfg.angle_grid_deg = opt.angle_grid;

    const evgrasp::EvalReport report = evgrasp::evaluate(samples, split, cfg);

    json j;
    j["split"] = opt.split;
    j["test_fraction"] = opt.test_fraction;
    j["seed"] = opt.seed;
    j["train_count"] = report.train_count;
    j["test_count"] = report.test_count;
    j["jaccard_threshold"] = cfg.jaccard_threshold;
    j["angle_threshold_deg"] = cfg.angle_threshold_deg;
    j["accuracy"] = report.accuracy;
    j["cells"] = json::array();
    for (const auto& cell : report.grid) {
        j["cells"].push_back({{"jaccard_threshold", cell.jaccard_threshold},
                              {"angle_threshold_deg", cell.angle_threshold_deg},
                              {"accuracy", cell.accuracy}});
    }
    auto out = open_out(opt.out_path);
    out << j.dump(2) << '\n';
    std::cout << "eval: accuracy " << report.accuracy << " over " << report.test_count
              << " test samples -> " << opt.out_path << '\n';
    return 0;
}

// ------------------------------------------------------------ histogram ----

struct HistogramOptions {
    std::string events_path;
    std::string out_path = "histogram.csv";
    double bin = 50.0;
};

int run_histogram(const HistogramOptions& opt) {
    const std::vector<evgrasp::Event> events = evgrasp::ingest_file(opt.events_path);
    const evgrasp::IntervalHistogram hist = evgrasp::interval_histogram(events, opt.bin);
    auto out = open_out(opt.out_path);
    evgrasp::write_histogram_csv(out, hist);
    std::cout << "histogram: " << hist.total << " intervals, mode " << hist.mode_period_us()
              << " us (" << hist.mode_frequency_hz() << " Hz) -> " << opt.out_path << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Event-stream grasp annotation toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", evgrasp::kVersion);

    std::string config_path;
    app.add_option("--config", config_path, "JSON config file (flags win over config values)");
    int threads = 1;
    app.add_option("--threads", threads, "Worker threads for window-parallel stages");

    SynthOptions synth;
    CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a synthetic event stream");
    synth_cmd->add_option("scene", synth.scene_path, "Scene JSON file")->required();
    synth_cmd->add_option("--out", synth.out_dir, "Output directory")->required();
    synth_cmd->add_option("--format", synth.format, "Event file format: csv or bin")
        ->check(CLI::IsMember({"csv", "bin"}));
    CLI::Option* synth_seed = synth_cmd->add_option("--seed", synth.seed, "Override scene seed");

    TrackOptions track;
    CLI::App* track_cmd = app.add_subcommand("track", "Track blinking markers with the SMP filter");
    track_cmd->add_option("events", track.events_path, "Event file")->required();
    track_cmd->add_option("--out", track.out_dir, "Output directory")->required();
    track_cmd->add_option("--alpha", track.alpha, "Spatial/temporal evidence ratio (0 = temporal only)");
    track_cmd->add_option("--particles", track.particles, "Particles per marker");
    track_cmd->add_option("--proposal-sigma", track.proposal_sigma, "Proposal noise, px");
    track_cmd->add_option("--marker-sigma", track.marker_sigma, "Blink period spread, us");
    track_cmd->add_option("--th-eff", track.th_eff, "Resampling fraction");
    track_cmd->add_option("--window", track.window, "Window length, us");
    track_cmd->add_option("--step", track.step, "Window step, us");
    track_cmd->add_option("--periods", track.periods, "Marker blink periods, us")->delimiter(',');
    track_cmd->add_option("--seed", track.seed, "RNG seed");

    EncodeOptions encode;
    CLI::App* encode_cmd = app.add_subcommand("encode", "Encode event windows into frames");
    encode_cmd->add_option("events", encode.events_path, "Event file")->required();
    encode_cmd->add_option("--out", encode.out_dir, "Output directory")->required();
    encode_cmd->add_option("--method", encode.method, "freq, sae, lif, or merged");
    encode_cmd->add_option("--window", encode.window, "Window length, us");
    encode_cmd->add_option("--step", encode.step, "Window step, us (default: window length)");
    encode_cmd->add_option("--lif-step", encode.lif.step_increase, "LIF potential step per event");
    encode_cmd->add_option("--lif-decay", encode.lif.decay_per_ms, "LIF leak per ms");
    encode_cmd->add_option("--lif-threshold", encode.lif.threshold, "LIF firing threshold");

    AnnotateOptions annotate;
    CLI::App* annotate_cmd =
        app.add_subcommand("annotate", "Build grasp annotations from track logs");
    annotate_cmd->add_option("--track", annotate.track_path, "Track log CSV")->required();
    annotate_cmd->add_option("--track2", annotate.track2_path,
                             "Second track log (extra correspondences in homography mode)");
    annotate_cmd->add_option("--seed-rects", annotate.seed_rects_path,
                             "First-frame annotation JSONL for homography propagation");
    annotate_cmd->add_option("--out", annotate.out_dir, "Output directory")->required();
    annotate_cmd->add_option("--label", annotate.label, "good or bad")
        ->check(CLI::IsMember({"good", "bad"}));
    annotate_cmd->add_option("--object-id", annotate.object_id, "Object id stored per record");
    annotate_cmd->add_flag("--homography", annotate.homography,
                           "Propagate seed rects through per-cycle planar maps");
    annotate_cmd->add_flag("--smooth", annotate.smooth, "Particle-smooth the trajectories first");
    annotate_cmd->add_option("--seed", annotate.seed, "RNG seed");

    EvalOptions eval;
    CLI::App* eval_cmd = app.add_subcommand("eval", "Rectangle-metric evaluation");
    eval_cmd->add_option("--predictions", eval.predictions_path, "Prediction JSONL")->required();
    eval_cmd->add_option("--annotations", eval.annotations_path, "Ground-truth JSONL")->required();
    eval_cmd->add_option("--out", eval.out_path, "Report JSON path");
    eval_cmd->add_option("--split", eval.split, "image or object")
        ->check(CLI::IsMember({"image", "object"}));
    eval_cmd->add_option("--test-fraction", eval.test_fraction, "Test partition fraction (0, 1]");
    eval_cmd->add_option("--jaccard", eval.jaccard, "Headline Jaccard threshold");
    eval_cmd->add_option("--angle", eval.angle, "Headline angle threshold, degrees");
    eval_cmd->add_option("--jaccard-grid", eval.jaccard_grid, "Jaccard sweep values")
        ->delimiter(',');
    eval_cmd->add_option("--angle-grid", eval.angle_grid, "Angle sweep values")->delimiter(',');
    eval_cmd->add_option("--seed", eval.seed, "Split shuffle seed");

    HistogramOptions hist;
    CLI::App* hist_cmd =
        app.add_subcommand("histogram", "Transition-interval histogram of a stream");
    hist_cmd->add_option("events", hist.events_path, "Event file")->required();
    hist_cmd->add_option("--out", hist.out_path, "Histogram CSV path");
    hist_cmd->add_option("--bin", hist.bin, "Bin width, us");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        CLI::App* active = app.get_subcommands().front();
        if (!config_path.empty()) {
            apply_json_config(active, load_config_file(config_path, active->get_name()));
        }
        int rc = 0;
        if (active == synth_cmd) {
            synth.seed_given = synth_seed->count() > 0;
            rc = run_synth(synth);
        } else if (active == track_cmd) {
            rc = run_track(track);
        } else if (active == encode_cmd) {
            encode.threads = threads;
            rc = run_encode(encode);
        } else if (active == annotate_cmd) {
            rc = run_annotate(annotate);
        } else if (active == eval_cmd) {
            rc = run_eval(eval);
        } else if (active == hist_cmd) {
            rc = run_histogram(hist);
        }
        if (rc != 0) return rc;
        return g_warnings > 0 ? 1 : 0;
    } catch (const evgrasp::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
