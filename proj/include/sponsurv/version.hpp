#pragma once

namespace sponsurv {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace sponsurv
