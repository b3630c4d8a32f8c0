#pragma once

namespace conecover {

inline constexpr const char* kToolName = "conecover";
inline constexpr const char* kVersion = "0.1.0";

}  // namespace conecover
