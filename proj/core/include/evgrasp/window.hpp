#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "evgrasp/event.hpp"
#include "evgrasp/pipeline.hpp"

namespace evgrasp {

struct WindowParams {
    std::uint64_t length = 10'000; // microseconds
    std::uint64_t step = 1'000;
    std::uint64_t t0 = 0;
    // One past the last window start. 0 means "derive from the stream":
    // last event time + 1, so the final event is still covered.
    std::uint64_t t_end = 0;
};

/// One sliding-window snapshot: the intervals completing inside
/// [start, start+length) plus per-pixel raw-event counts over the same span.
/// Snapshots are immutable and safe to hand to other threads.
class WindowView {
public:
    WindowView(std::uint64_t start, std::uint64_t length, std::uint64_t step,
               std::span<const TransitionInterval> intervals,
               std::shared_ptr<const std::vector<std::uint32_t>> counts)
        : start_(start), length_(length), step_(step), intervals_(intervals),
          counts_(std::move(counts)) {}

    std::uint64_t start() const { return start_; }
    std::uint64_t length() const { return length_; }
    std::uint64_t step() const { return step_; }
    std::uint64_t end() const { return start_ + length_; }
    std::uint64_t center() const { return start_ + length_ / 2; }

    std::span<const TransitionInterval> intervals() const { return intervals_; }

    /// Raw events (any polarity) recorded at (x, y) within the window.
    std::uint32_t events_at(int x, int y) const { return (*counts_)[pixel_index(x, y)]; }

private:
    std::uint64_t start_;
    std::uint64_t length_;
    std::uint64_t step_;
    std::span<const TransitionInterval> intervals_;
    std::shared_ptr<const std::vector<std::uint32_t>> counts_;
};

/// Generates consecutive WindowViews over a preprocessed stream. Single pass;
/// window k starts at t0 + k*step. The referenced event/interval storage must
/// outlive the sequence and its views.
class WindowSequence {
public:
    WindowSequence(std::span<const Event> events,
                   std::span<const TransitionInterval> intervals,
                   WindowParams params = {});

    /// Next window, or nullopt once start reaches t_end.
    std::optional<WindowView> next();

    std::uint64_t window_count() const; // total windows this sequence will emit

private:
    std::span<const Event> events_;
    std::span<const TransitionInterval> intervals_;
    WindowParams params_;
    std::uint64_t start_;
    std::size_t ev_lo_ = 0, ev_hi_ = 0;
    std::size_t iv_lo_ = 0, iv_hi_ = 0;
    std::vector<std::uint32_t> live_counts_;
};

/// Materialize every window. Only sensible for small streams (each view holds
/// a full count-grid snapshot); the tracker consumes WindowSequence directly.
std::vector<WindowView> collect_windows(std::span<const Event> events,
                                        std::span<const TransitionInterval> intervals,
                                        WindowParams params = {});

} // namespace evgrasp
