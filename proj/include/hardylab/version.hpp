#pragma once

namespace hardylab {

inline constexpr const char* artifact_version = "1.0.0";

} // namespace hardylab
