#include "evgrasp/window.hpp"

#include "evgrasp/errors.hpp"

namespace evgrasp {

WindowSequence::WindowSequence(std::span<const Event> events,
                               std::span<const TransitionInterval> intervals,
                               WindowParams params)
    : events_(events), intervals_(intervals), params_(params), start_(params.t0),
      live_counts_(kSensorPixels, 0) {
    if (params_.step == 0) throw ConfigError("window step must be positive");
    if (params_.step > params_.length) throw ConfigError("window step exceeds window length");
    if (params_.t_end == 0) {
        params_.t_end = events_.empty() ? params_.t0 + 1 : events_.back().t + 1;
    }
}

std::uint64_t WindowSequence::window_count() const {
    if (params_.t_end <= params_.t0) return 0;
    return (params_.t_end - params_.t0 + params_.step - 1) / params_.step;
}

std::optional<WindowView> WindowSequence::next() {
    if (start_ >= params_.t_end) return std::nullopt;
    const std::uint64_t end = start_ + params_.length;

    while (ev_hi_ < events_.size() && events_[ev_hi_].t < end) {
        ++live_counts_[pixel_index(events_[ev_hi_].x, events_[ev_hi_].y)];
        ++ev_hi_;
    }
    while (ev_lo_ < ev_hi_ && events_[ev_lo_].t < start_) {
        --live_counts_[pixel_index(events_[ev_lo_].x, events_[ev_lo_].y)];
        ++ev_lo_;
    }
    while (iv_hi_ < intervals_.size() && intervals_[iv_hi_].t < end) ++iv_hi_;
    while (iv_lo_ < iv_hi_ && intervals_[iv_lo_].t < start_) ++iv_lo_;

    WindowView view(start_, params_.length, params_.step,
                    intervals_.subspan(iv_lo_, iv_hi_ - iv_lo_),
                    std::make_shared<const std::vector<std::uint32_t>>(live_counts_));
    start_ += params_.step;
    return view;
}

std::vector<WindowView> collect_windows(std::span<const Event> events,
                                        std::span<const TransitionInterval> intervals,
                                        WindowParams params) {
    WindowSequence seq(events, intervals, params);
    std::vector<WindowView> out;
    while (auto w = seq.next()) out.push_back(std::move(*w));
    return out;
}

} // namespace evgrasp
