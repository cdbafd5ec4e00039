#pragma once

namespace optnet {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace optnet
