#pragma once

namespace solvgeo {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace solvgeo
