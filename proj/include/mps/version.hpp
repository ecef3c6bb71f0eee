#pragma once

namespace mps {

inline constexpr const char* kVersion = "0.1.0";

} // namespace mps
