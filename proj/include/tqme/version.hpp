#pragma once

namespace tqme {

inline constexpr const char* kVersion = "0.1.0";

} // namespace tqme
