#pragma once

namespace evgrasp {

inline constexpr const char* kVersion = "0.1.0";

} // namespace evgrasp
