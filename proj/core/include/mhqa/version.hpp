#pragma once

namespace mhqa {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mhqa
