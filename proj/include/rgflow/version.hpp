#pragma once

namespace rgflow {

inline constexpr const char* version = "0.1.0";

} // namespace rgflow
