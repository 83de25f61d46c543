#pragma once

namespace usar {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr unsigned kCheckpointVersion = 1;

}  // namespace usar
