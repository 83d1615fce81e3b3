#pragma once

namespace propgen {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace propgen
