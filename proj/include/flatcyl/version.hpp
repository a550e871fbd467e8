#pragma once

namespace flatcyl {

inline constexpr const char* version = "1.0.0";

}  // namespace flatcyl
