#pragma once

#include <string>

namespace inpaint_lab {

enum class LogLevel { kDebug = 0, kInfo = 1, kWarning = 2, kError = 3, kSilent = 4 };

// Process-wide threshold; messages below it are dropped. Default kInfo,
// overridable with INPAINT_LAB_LOG=debug|info|warning|error|silent.
void set_log_level(LogLevel level);
LogLevel log_level();

void log(LogLevel level, const std::string& msg);
inline void log_info(const std::string& msg) { log(LogLevel::kInfo, msg); }
inline void log_warning(const std::string& msg) { log(LogLevel::kWarning, msg); }
inline void log_debug(const std::string& msg) { log(LogLevel::kDebug, msg); }

}  // namespace inpaint_lab
