#pragma once

namespace gfra {

inline constexpr const char* kVersionString = "gfra 0.1.0";

}  // namespace gfra
