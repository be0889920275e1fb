#pragma once

#include <filesystem>
#include <string>

#include "evgrasp/encoders.hpp"

namespace evgrasp {

/// Binary PGM (P5), one byte per pixel.
void write_pgm(const std::filesystem::path& path, const EventFrame& frame);
EventFrame read_pgm(const std::filesystem::path& path);

/// Binary PPM (P6), interleaved RGB.
void write_ppm(const std::filesystem::path& path, const MergedFrame& frame);
MergedFrame read_ppm(const std::filesystem::path& path);

/// Canonical output filename: "<prefix>_<start µs, zero-padded>.<ext>".
std::string frame_filename(const std::string& prefix, std::uint64_t window_start_us,
                           const std::string& ext);

} // namespace evgrasp
