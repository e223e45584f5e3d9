#pragma once

namespace tpdo {
inline constexpr const char* kVersion = "0.3.0";
}
