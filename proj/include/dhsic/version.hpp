#pragma once

namespace dhsic {

inline constexpr const char* kLibraryVersion = "0.1.0";

}  // namespace dhsic
