#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "evgrasp/event.hpp"

namespace evgrasp {

enum class PixelState : std::uint8_t { Unknown = 0, Plus = 1, Minus = 2 };

enum class TransitionKind : std::uint8_t { P = 0, N = 1 };

/// A change of a pixel's inferred lighting state.
struct Transition {
    std::uint64_t t = 0;
    TransitionKind kind = TransitionKind::P;
    std::uint16_t x = 0;
    std::uint16_t y = 0;

    bool operator==(const Transition&) const = default;
};

/// Time gap between two same-kind transitions at one pixel. Always delta > 0.
struct TransitionInterval {
    std::uint64_t t = 0;     // time of the later transition
    std::uint64_t delta = 0; // microseconds
    TransitionKind kind = TransitionKind::P;
    std::uint16_t x = 0;
    std::uint16_t y = 0;

    bool operator==(const TransitionInterval&) const = default;
};

/// Per-pixel lighting state plus the last two transition times of each kind.
///
/// The previous-to-last time is what interval_of() needs: apply_event() has
/// already recorded the emitted transition as the latest one by the time the
/// caller asks for the interval.
class PixelStateGrid {
public:
    PixelStateGrid();

    PixelState state(int x, int y) const { return slots_[pixel_index(x, y)].state; }

    /// Last recorded transition time of `kind` at (x, y), if any.
    std::optional<std::uint64_t> last_transition(int x, int y, TransitionKind kind) const;

    std::uint64_t latest_event_time() const { return latest_event_time_; }

    /// Feed one event. Returns the transition it caused, if the state changed.
    /// The first event at a pixel only seeds the state.
    std::optional<Transition> apply_event(const Event& e);

    /// Interval ending at `tr`, if a prior same-kind transition exists at the
    /// pixel. `tr` must be the transition most recently returned by
    /// apply_event() for that pixel. Zero-length gaps (possible when several
    /// events share one microsecond) carry no rate information and yield
    /// nothing.
    std::optional<TransitionInterval> interval_of(const Transition& tr) const;

private:
    struct PixelSlot {
        PixelState state = PixelState::Unknown;
        std::uint64_t last[2] = {0, 0}; // indexed by TransitionKind
        std::uint64_t prev[2] = {0, 0};
        std::uint8_t have = 0; // bit 0: last[P], bit 1: last[N], bit 2: prev[P], bit 3: prev[N]
    };
    std::vector<PixelSlot> slots_;
    std::uint64_t latest_event_time_ = 0;
};

/// Convenience free functions mirroring the grid members.
inline std::optional<Transition> apply_event(PixelStateGrid& grid, const Event& e) {
    return grid.apply_event(e);
}
inline std::optional<TransitionInterval> interval_of(const PixelStateGrid& grid, const Transition& tr) {
    return grid.interval_of(tr);
}

/// Events replayed through the full four-stage pipeline.
struct PreprocessedStream {
    std::vector<Event> events;                 // the ingested stream, time-ordered
    std::vector<Transition> transitions;       // in emission order
    std::vector<TransitionInterval> intervals; // in emission order (non-decreasing t)
};

/// Run Raw Events -> States -> Transitions -> Intervals over a time-ordered stream.
PreprocessedStream preprocess(std::span<const Event> events);

} // namespace evgrasp
