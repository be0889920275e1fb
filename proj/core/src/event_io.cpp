#include "evgrasp/event_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "evgrasp/errors.hpp"

namespace evgrasp {

namespace {

constexpr std::size_t kBinaryRecordSize = 8 + 2 + 2 + 1;

template <typename T>
T parse_field(std::string_view text, std::size_t line, const char* name) {
    T value{};
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        throw ParseError(std::string("malformed ") + name + " field '" + std::string(text) + "'",
                         line);
    }
    return value;
}

void check_event_bounds(std::uint64_t x, std::uint64_t y, std::size_t line) {
    if (x >= kSensorWidth || y >= kSensorHeight) {
        std::string msg = "event coordinates out of bounds: (" + std::to_string(x) + "," +
                          std::to_string(y) + ")";
        if (line > 0) msg += " at line " + std::to_string(line);
        throw ValidationError(msg);
    }
}

// Repairs small regressions, rejects large ones. Returns events in
// non-decreasing timestamp order.
void finalize_order(std::vector<Event>& events, std::uint64_t tolerance) {
    bool needs_sort = false;
    std::uint64_t prev = 0;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const std::uint64_t t = events[i].t;
        if (i > 0 && t < prev) {
            if (prev - t > tolerance) {
                throw OrderingError("timestamp regression of " + std::to_string(prev - t) +
                                    " us at record " + std::to_string(i + 1) +
                                    " exceeds tolerance of " + std::to_string(tolerance) + " us");
            }
            needs_sort = true;
        }
        prev = std::max(prev, t);
    }
    if (needs_sort) {
        std::stable_sort(events.begin(), events.end(),
                         [](const Event& a, const Event& b) { return a.t < b.t; });
    }
}

std::vector<Event> ingest_csv(std::istream& in, const IngestOptions& opts) {
    std::vector<Event> events;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;

        std::string_view sv(line);
        std::array<std::string_view, 4> fields;
        std::size_t n = 0;
        bool terminated = false;
        while (n < 4) {
            const std::size_t comma = sv.find(',');
            fields[n++] = sv.substr(0, comma);
            if (comma == std::string_view::npos) {
                terminated = true;
                break;
            }
            sv.remove_prefix(comma + 1);
        }
        if (n != 4 || !terminated) {
            throw ParseError("expected 4 comma-separated fields (t_us,x,y,polarity)", lineno);
        }

        Event e;
        e.t = parse_field<std::uint64_t>(fields[0], lineno, "timestamp");
        const auto x = parse_field<std::uint32_t>(fields[1], lineno, "x");
        const auto y = parse_field<std::uint32_t>(fields[2], lineno, "y");
        const auto pol = parse_field<std::uint32_t>(fields[3], lineno, "polarity");
        check_event_bounds(x, y, lineno);
        if (pol > 1) throw ParseError("polarity must be 0 or 1", lineno);
        e.x = std::uint16_t(x);
        e.y = std::uint16_t(y);
        e.polarity = pol ? Polarity::On : Polarity::Off;
        events.push_back(e);
    }
    finalize_order(events, opts.reorder_tolerance_us);
    return events;
}

std::uint64_t load_le(const unsigned char* p, int bytes) {
    std::uint64_t v = 0;
    for (int i = bytes - 1; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

void store_le(unsigned char* p, std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) {
        p[i] = (unsigned char)(v & 0xFF);
        v >>= 8;
    }
}

std::vector<Event> ingest_binary(std::istream& in, const IngestOptions& opts) {
    char magic[8];
    in.read(magic, 8);
    if (in.gcount() != 8 || std::memcmp(magic, kEventBinaryMagic, 8) != 0) {
        throw ParseError("missing EVGRSP01 magic header", 0, 0);
    }
    std::vector<Event> events;
    unsigned char rec[kBinaryRecordSize];
    std::size_t offset = 8;
    while (true) {
        in.read(reinterpret_cast<char*>(rec), kBinaryRecordSize);
        const std::size_t got = std::size_t(in.gcount());
        if (got == 0) break;
        if (got != kBinaryRecordSize) {
            throw ParseError("truncated binary record", 0, offset);
        }
        Event e;
        e.t = load_le(rec, 8);
        const auto x = std::uint16_t(load_le(rec + 8, 2));
        const auto y = std::uint16_t(load_le(rec + 10, 2));
        const auto pol = rec[12];
        check_event_bounds(x, y, 0);
        if (pol > 1) throw ParseError("polarity byte must be 0 or 1", 0, offset + 12);
        e.x = x;
        e.y = y;
        e.polarity = pol ? Polarity::On : Polarity::Off;
        events.push_back(e);
        offset += kBinaryRecordSize;
    }
    finalize_order(events, opts.reorder_tolerance_us);
    return events;
}

} // namespace

std::vector<Event> ingest(std::istream& in, const IngestOptions& opts) {
    EventFileFormat format = opts.format;
    if (format == EventFileFormat::Auto) {
        char magic[8];
        in.read(magic, 8);
        const std::streamsize got = in.gcount();
        in.clear();
        in.seekg(0);
        format = (got == 8 && std::memcmp(magic, kEventBinaryMagic, 8) == 0)
                     ? EventFileFormat::Binary
                     : EventFileFormat::Csv;
    }
    return format == EventFileFormat::Binary ? ingest_binary(in, opts) : ingest_csv(in, opts);
}

std::vector<Event> ingest_file(const std::filesystem::path& path, const IngestOptions& opts) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open event file: " + path.string());
    return ingest(in, opts);
}

void write_events_csv(std::ostream& out, std::span<const Event> events) {
    for (const Event& e : events) {
        out << e.t << ',' << e.x << ',' << e.y << ',' << int(e.polarity) << '\n';
    }
}

void write_events_binary(std::ostream& out, std::span<const Event> events) {
    out.write(kEventBinaryMagic, 8);
    unsigned char rec[kBinaryRecordSize];
    for (const Event& e : events) {
        store_le(rec, e.t, 8);
        store_le(rec + 8, e.x, 2);
        store_le(rec + 10, e.y, 2);
        rec[12] = (unsigned char)(e.polarity);
        out.write(reinterpret_cast<const char*>(rec), kBinaryRecordSize);
    }
}

void write_events_file(const std::filesystem::path& path, std::span<const Event> events,
                       EventFileFormat format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open output file: " + path.string());
    if (format == EventFileFormat::Binary) {
        write_events_binary(out, events);
    } else {
        write_events_csv(out, events);
    }
    if (!out) throw IoError("failed writing " + path.string());
}

} // namespace evgrasp
