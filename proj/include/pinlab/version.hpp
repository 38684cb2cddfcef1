#pragma once

namespace pinlab {
inline constexpr const char* kVersion = "0.1.0";
}
