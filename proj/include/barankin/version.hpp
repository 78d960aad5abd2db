#pragma once

namespace barankin {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace barankin
