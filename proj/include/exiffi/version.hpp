#pragma once

namespace exiffi {

inline constexpr const char* kToolName = "exiffi";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace exiffi
