#pragma once

namespace aggecon {

inline constexpr char kVersion[] = "0.1.0";

}  // namespace aggecon
