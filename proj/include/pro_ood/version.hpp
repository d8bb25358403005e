#pragma once

namespace pro_ood {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace pro_ood
