#include "evgrasp/image_io.hpp"

#include <cstdio>
#include <fstream>

#include "evgrasp/errors.hpp"

namespace evgrasp {

namespace {

void expect_header(std::istream& in, const char* magic, const std::filesystem::path& path) {
    std::string word;
    in >> word;
    if (word != magic) throw ParseError(path.string() + ": expected " + std::string(magic));
    int w = 0, h = 0, maxval = 0;
    in >> w >> h >> maxval;
    if (w != kSensorWidth || h != kSensorHeight || maxval != 255) {
        throw ParseError(path.string() + ": unsupported dimensions or depth");
    }
    in.get(); // single whitespace after maxval
}

} // namespace

void write_pgm(const std::filesystem::path& path, const EventFrame& frame) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string());
    out << "P5\n" << kSensorWidth << ' ' << kSensorHeight << "\n255\n";
    out.write(reinterpret_cast<const char*>(frame.pixels.data()), frame.pixels.size());
    if (!out) throw IoError("failed writing " + path.string());
}

EventFrame read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    expect_header(in, "P5", path);
    EventFrame frame;
    in.read(reinterpret_cast<char*>(frame.pixels.data()), frame.pixels.size());
    if (in.gcount() != std::streamsize(frame.pixels.size())) {
        throw ParseError(path.string() + ": truncated pixel data");
    }
    return frame;
}

void write_ppm(const std::filesystem::path& path, const MergedFrame& frame) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string());
    out << "P6\n" << kSensorWidth << ' ' << kSensorHeight << "\n255\n";
    std::vector<std::uint8_t> row(kSensorPixels * 3);
    for (int i = 0; i < kSensorPixels; ++i) {
        row[3 * i + 0] = frame.r.pixels[i];
        row[3 * i + 1] = frame.g.pixels[i];
        row[3 * i + 2] = frame.b.pixels[i];
    }
    out.write(reinterpret_cast<const char*>(row.data()), row.size());
    if (!out) throw IoError("failed writing " + path.string());
}

MergedFrame read_ppm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    expect_header(in, "P6", path);
    std::vector<std::uint8_t> raw(kSensorPixels * 3);
    in.read(reinterpret_cast<char*>(raw.data()), raw.size());
    if (in.gcount() != std::streamsize(raw.size())) {
        throw ParseError(path.string() + ": truncated pixel data");
    }
    MergedFrame frame;
    frame.r.encoder = EncoderKind::Freq;
    frame.g.encoder = EncoderKind::Sae;
    frame.b.encoder = EncoderKind::Lif;
    for (int i = 0; i < kSensorPixels; ++i) {
        frame.r.pixels[i] = raw[3 * i + 0];
        frame.g.pixels[i] = raw[3 * i + 1];
        frame.b.pixels[i] = raw[3 * i + 2];
    }
    return frame;
}

std::string frame_filename(const std::string& prefix, std::uint64_t window_start_us,
                           const std::string& ext) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%012llu", (unsigned long long)window_start_us);
    return prefix + "_" + buf + "." + ext;
}

} // namespace evgrasp
