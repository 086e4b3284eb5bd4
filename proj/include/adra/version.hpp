#pragma once

#include <string_view>

namespace adra {
inline constexpr std::string_view kVersion = "0.1.0";
}
