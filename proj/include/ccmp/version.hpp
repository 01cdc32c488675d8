#pragma once

namespace ccmp {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace ccmp
