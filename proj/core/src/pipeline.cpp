#include "evgrasp/pipeline.hpp"

#include <algorithm>

#include "evgrasp/errors.hpp"

namespace evgrasp {

namespace {

constexpr std::uint8_t last_bit(TransitionKind k) { return std::uint8_t(1u << int(k)); }
constexpr std::uint8_t prev_bit(TransitionKind k) { return std::uint8_t(4u << int(k)); }

} // namespace

PixelStateGrid::PixelStateGrid() : slots_(kSensorPixels) {}

std::optional<std::uint64_t> PixelStateGrid::last_transition(int x, int y, TransitionKind kind) const {
    const PixelSlot& s = slots_[pixel_index(x, y)];
    if (!(s.have & last_bit(kind))) return std::nullopt;
    return s.last[int(kind)];
}

std::optional<Transition> PixelStateGrid::apply_event(const Event& e) {
    if (!in_sensor_bounds(e.x, e.y)) {
        throw ValidationError("event coordinates out of sensor bounds: (" + std::to_string(e.x) +
                              "," + std::to_string(e.y) + ")");
    }
    latest_event_time_ = std::max(latest_event_time_, e.t);

    PixelSlot& s = slots_[pixel_index(e.x, e.y)];
    const PixelState next = (e.polarity == Polarity::On) ? PixelState::Plus : PixelState::Minus;
    if (s.state == next) return std::nullopt; // repeated polarity, nothing changed
    const bool was_unknown = (s.state == PixelState::Unknown);
    s.state = next;
    if (was_unknown) return std::nullopt; // first event only seeds the state

    const TransitionKind kind =
        (next == PixelState::Plus) ? TransitionKind::P : TransitionKind::N;
    if (s.have & last_bit(kind)) {
        s.prev[int(kind)] = s.last[int(kind)];
        s.have |= prev_bit(kind);
    }
    s.last[int(kind)] = e.t;
    s.have |= last_bit(kind);
    return Transition{e.t, kind, e.x, e.y};
}

std::optional<TransitionInterval> PixelStateGrid::interval_of(const Transition& tr) const {
    const PixelSlot& s = slots_[pixel_index(tr.x, tr.y)];
    if (!(s.have & prev_bit(tr.kind))) return std::nullopt;
    const std::uint64_t earlier = s.prev[int(tr.kind)];
    if (tr.t <= earlier) return std::nullopt; // same-microsecond flicker, no usable gap
    return TransitionInterval{tr.t, tr.t - earlier, tr.kind, tr.x, tr.y};
}

PreprocessedStream preprocess(std::span<const Event> events) {
    PreprocessedStream out;
    out.events.assign(events.begin(), events.end());
    out.transitions.reserve(events.size() / 2);

    PixelStateGrid grid;
    std::uint64_t prev_t = 0;
    for (const Event& e : out.events) {
        if (e.t < prev_t) {
            throw OrderingError("preprocess requires a time-ordered stream");
        }
        prev_t = e.t;
        if (auto tr = grid.apply_event(e)) {
            out.transitions.push_back(*tr);
            if (auto iv = grid.interval_of(*tr)) {
                out.intervals.push_back(*iv);
            }
        }
    }
    return out;
}

} // namespace evgrasp
