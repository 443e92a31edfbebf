#pragma once

namespace ptsat {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kUnits = "hbar=1, 2m=1";

}  // namespace ptsat
