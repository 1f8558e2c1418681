#pragma once

namespace mimpact {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mimpact
