#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "evgrasp/event.hpp"

namespace evgrasp {

enum class EncoderKind : std::uint8_t { Freq = 0, Sae = 1, Lif = 2 };

/// 240x180 8-bit frame produced by one encoder over one window.
struct EventFrame {
    EncoderKind encoder = EncoderKind::Freq;
    std::uint64_t window_start = 0;
    std::uint64_t window_length = 0;
    std::vector<std::uint8_t> pixels = std::vector<std::uint8_t>(kSensorPixels, 0);

    std::uint8_t at(int x, int y) const { return pixels[pixel_index(x, y)]; }
    std::uint8_t& at(int x, int y) { return pixels[pixel_index(x, y)]; }

    bool same_window(const EventFrame& o) const {
        return window_start == o.window_start && window_length == o.window_length;
    }
};

/// Three-channel frame: R = Frequency, G = SAE, B = LIF.
struct MergedFrame {
    EventFrame r;
    EventFrame g;
    EventFrame b;
};

struct LifConfig {
    double step_increase = 1.0;  // membrane potential units per event
    double decay_per_ms = 0.1;   // linear leak, units per millisecond
    double threshold = 1.5;      // firing threshold
};

// Default window for dataset-style encoding. The tracker keeps its own
// 10 ms / 1 ms cadence.
inline constexpr std::uint64_t kDatasetWindowUs = 20'000;

/// Event-count range normalization: 255 * 2 * (1 / (1 + e^-n) - 0.5).
double count_normalization(double n);

/// Round half away from zero, clamp to [0, 255].
std::uint8_t to_pixel_value(double v);

/// Per-pixel event counts mapped through count_normalization().
/// Order-independent; any polarity counts.
EventFrame encode_frequency(std::span<const Event> window_events, std::uint64_t t0,
                            std::uint64_t length);

/// Surface of active events: per pixel, the most recent event's timestamp
/// mapped to round(255 * (t_p - t0) / length). Untouched pixels stay 0.
EventFrame encode_sae(std::span<const Event> window_events, std::uint64_t t0,
                      std::uint64_t length);

/// Leaky integrate-and-fire: events step the pixel's membrane potential up,
/// a linear leak pulls it toward zero between events, crossing the threshold
/// fires (counter += 1) and resets the potential. The firing count goes
/// through count_normalization(). Events must be time-ordered.
EventFrame encode_lif(std::span<const Event> window_events, std::uint64_t t0,
                      std::uint64_t length, const LifConfig& cfg = {});

/// Channel assembly [R,G,B] = [Frequency, SAE, LIF]. All three frames must
/// cover the same window.
MergedFrame merge(EventFrame freq, EventFrame sae, EventFrame lif);

} // namespace evgrasp
