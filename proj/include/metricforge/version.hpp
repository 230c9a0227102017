#pragma once

namespace metricforge {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace metricforge
