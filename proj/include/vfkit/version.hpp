#pragma once

namespace vfkit {

inline constexpr const char* kToolName = "vfkit";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace vfkit
