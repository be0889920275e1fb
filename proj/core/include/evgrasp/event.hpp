#pragma once

#include <cstdint>

namespace evgrasp {

// DAVIS sensor geometry. All pixel addressing in the toolkit assumes this grid.
inline constexpr int kSensorWidth = 240;
inline constexpr int kSensorHeight = 180;
inline constexpr int kSensorPixels = kSensorWidth * kSensorHeight;

enum class Polarity : std::uint8_t { Off = 0, On = 1 };

/// One asynchronous brightness-change report.
struct Event {
    std::uint64_t t = 0; // microseconds
    std::uint16_t x = 0; // column, [0, 239]
    std::uint16_t y = 0; // row, [0, 179]
    Polarity polarity = Polarity::Off;

    bool operator==(const Event&) const = default;
};

inline bool in_sensor_bounds(int x, int y) {
    return x >= 0 && x < kSensorWidth && y >= 0 && y < kSensorHeight;
}

inline int pixel_index(int x, int y) { return y * kSensorWidth + x; }

} // namespace evgrasp
