#pragma once

namespace sepcsc {

inline constexpr const char *kVersion = "0.1.0";

} // namespace sepcsc
