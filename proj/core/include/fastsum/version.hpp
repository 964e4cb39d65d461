#pragma once

namespace fastsum {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace fastsum
