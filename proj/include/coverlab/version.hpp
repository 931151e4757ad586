#pragma once

namespace coverlab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace coverlab
