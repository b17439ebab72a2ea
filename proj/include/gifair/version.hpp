#pragma once

namespace gifair {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace gifair
