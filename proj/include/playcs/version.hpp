#pragma once

namespace playcs {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace playcs
