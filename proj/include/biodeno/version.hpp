#pragma once

namespace biodeno {
inline constexpr const char* kToolVersion = "biodeno 0.1.0";
inline constexpr int kReportSchemaVersion = 1;
}  // namespace biodeno
