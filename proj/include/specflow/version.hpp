#pragma once

namespace specflow {

inline constexpr const char* version = "0.1.0";

}  // namespace specflow
