#pragma once

namespace fourierhead {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace fourierhead
