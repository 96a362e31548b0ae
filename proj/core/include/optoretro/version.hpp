#pragma once

namespace optoretro {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace optoretro
