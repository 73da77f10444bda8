#pragma once

namespace zeno {

inline constexpr const char* kVersion = "1.0.0";
/// Bumped whenever a CSV/JSON column set changes.
inline constexpr int kOutputSchema = 1;

} // namespace zeno
