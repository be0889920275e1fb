#include "evgrasp/encoders.hpp"

#include <algorithm>
#include <cmath>

#include "evgrasp/errors.hpp"

namespace evgrasp {

double count_normalization(double n) {
    // 255 * 2 * (1 / (1 + e^-n) - 1/2), evaluated through the tanh identity
    // to stay within 1 ulp of the exact value across the full count range
    return 255.0 * std::tanh(n / 2.0);
}

std::uint8_t to_pixel_value(double v) {
    const long long r = std::llround(v);
    return std::uint8_t(std::clamp<long long>(r, 0, 255));
}

EventFrame encode_frequency(std::span<const Event> window_events, std::uint64_t t0,
                            std::uint64_t length) {
    EventFrame frame;
    frame.encoder = EncoderKind::Freq;
    frame.window_start = t0;
    frame.window_length = length;

    std::vector<std::uint32_t> counts(kSensorPixels, 0);
    for (const Event& e : window_events) ++counts[pixel_index(e.x, e.y)];
    for (int i = 0; i < kSensorPixels; ++i) {
        if (counts[i] > 0) frame.pixels[i] = to_pixel_value(count_normalization(counts[i]));
    }
    return frame;
}

EventFrame encode_sae(std::span<const Event> window_events, std::uint64_t t0,
                      std::uint64_t length) {
    if (length == 0) throw ConfigError("SAE window length must be positive");
    EventFrame frame;
    frame.encoder = EncoderKind::Sae;
    frame.window_start = t0;
    frame.window_length = length;

    // most recent event per pixel, regardless of polarity
    std::vector<std::int64_t> latest(kSensorPixels, -1);
    for (const Event& e : window_events) {
        auto& slot = latest[pixel_index(e.x, e.y)];
        slot = std::max<std::int64_t>(slot, std::int64_t(e.t));
    }
    for (int i = 0; i < kSensorPixels; ++i) {
        if (latest[i] < 0) continue;
        const double dt = double(std::uint64_t(latest[i]) - t0);
        frame.pixels[i] = to_pixel_value(255.0 * dt / double(length));
    }
    return frame;
}

EventFrame encode_lif(std::span<const Event> window_events, std::uint64_t t0,
                      std::uint64_t length, const LifConfig& cfg) {
    if (cfg.step_increase <= 0 || cfg.decay_per_ms < 0 || cfg.threshold <= 0) {
        throw ConfigError("LIF parameters must be positive");
    }
    EventFrame frame;
    frame.encoder = EncoderKind::Lif;
    frame.window_start = t0;
    frame.window_length = length;

    struct Neuron {
        double mp = 0.0;
        std::uint64_t last_t = 0;
        std::uint32_t fires = 0;
    };
    std::vector<Neuron> neurons(kSensorPixels);

    std::uint64_t prev_t = 0;
    for (const Event& e : window_events) {
        if (e.t < prev_t) throw OrderingError("LIF encoder requires time-ordered events");
        prev_t = e.t;

        Neuron& n = neurons[pixel_index(e.x, e.y)];
        const double elapsed_ms = double(e.t - n.last_t) / 1000.0;
        n.mp = std::max(0.0, n.mp - cfg.decay_per_ms * elapsed_ms);
        n.last_t = e.t;
        n.mp += cfg.step_increase;
        if (n.mp > cfg.threshold) {
            ++n.fires;
            n.mp = 0.0;
        }
    }
    for (int i = 0; i < kSensorPixels; ++i) {
        if (neurons[i].fires > 0) {
            frame.pixels[i] = to_pixel_value(count_normalization(neurons[i].fires));
        }
    }
    return frame;
}

MergedFrame merge(EventFrame freq, EventFrame sae, EventFrame lif) {
    if (!freq.same_window(sae) || !freq.same_window(lif)) {
        throw ValidationError("merge requires all three frames to cover the same window");
    }
    return MergedFrame{std::move(freq), std::move(sae), std::move(lif)};
}

} // namespace evgrasp
