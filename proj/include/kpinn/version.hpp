#pragma once

namespace kpinn {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace kpinn
