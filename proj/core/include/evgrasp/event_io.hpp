#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "evgrasp/event.hpp"

namespace evgrasp {

enum class EventFileFormat {
    Csv,    // one event per line: t_us,x,y,polarity  (polarity 0/1)
    Binary, // "EVGRSP01" magic, then little-endian u64 t, u16 x, u16 y, u8 polarity
    Auto,   // sniff the magic, fall back to CSV
};

inline constexpr char kEventBinaryMagic[8] = {'E', 'V', 'G', 'R', 'S', 'P', '0', '1'};

struct IngestOptions {
    EventFileFormat format = EventFileFormat::Auto;
    // Timestamp regressions up to this many microseconds are repaired by a
    // stable sort (hardware jitter); anything larger aborts ingestion.
    std::uint64_t reorder_tolerance_us = 1'000;
};

/// Parse an event stream. Events come back in non-decreasing timestamp order.
std::vector<Event> ingest(std::istream& in, const IngestOptions& opts = {});
std::vector<Event> ingest_file(const std::filesystem::path& path, const IngestOptions& opts = {});

void write_events_csv(std::ostream& out, std::span<const Event> events);
void write_events_binary(std::ostream& out, std::span<const Event> events);
void write_events_file(const std::filesystem::path& path, std::span<const Event> events,
                       EventFileFormat format);

} // namespace evgrasp
