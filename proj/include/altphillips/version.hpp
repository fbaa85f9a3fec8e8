#pragma once

namespace ap {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace ap
