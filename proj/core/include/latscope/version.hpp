#pragma once

namespace latscope {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace latscope
