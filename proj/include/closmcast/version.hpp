#pragma once

namespace closmcast {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace closmcast
