#include "common/log.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <iostream>
#include <mutex>

namespace inpaint_lab {

namespace {

LogLevel level_from_env() {
  const char* v = std::getenv("INPAINT_LAB_LOG");
  if (!v) return LogLevel::kInfo;
  if (!std::strcmp(v, "debug")) return LogLevel::kDebug;
  if (!std::strcmp(v, "warning")) return LogLevel::kWarning;
  if (!std::strcmp(v, "error")) return LogLevel::kError;
  if (!std::strcmp(v, "silent")) return LogLevel::kSilent;
  return LogLevel::kInfo;
}

std::atomic<LogLevel>& current() {
  static std::atomic<LogLevel> level{level_from_env()};
  return level;
}

}  // namespace

void set_log_level(LogLevel level) { current().store(level); }
LogLevel log_level() { return current().load(); }

void log(LogLevel level, const std::string& msg) {
  if (level < current().load()) return;
  static std::mutex mu;
  static constexpr const char* kTags[] = {"debug", "info", "warning", "error"};
  std::lock_guard lock(mu);
  std::cerr << "[" << kTags[static_cast<int>(level)] << "] " << msg << '\n';
}

}  // namespace inpaint_lab
