#pragma once

#include <string_view>

namespace attnlex {

inline constexpr std::string_view kVersion = "0.1.0";

} // namespace attnlex
