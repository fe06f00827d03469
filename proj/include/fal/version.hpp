#pragma once

namespace fal {
inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kSpecSchemaVersion = "fal-exp-1";
}  // namespace fal
