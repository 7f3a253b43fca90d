#include "log.hpp"

#include <chrono>
#include <iostream>

#include "error.hpp"

namespace netcontrast::service {

namespace {

std::string_view level_name(LogLevel level) {
  switch (level) {
    case LogLevel::debug: return "debug";
    case LogLevel::info: return "info";
    case LogLevel::warn: return "warn";
    case LogLevel::error: return "error";
    case LogLevel::off: return "off";
  }
  return "info";
}

}  // namespace

LogLevel log_level_from_string(std::string_view text) {
  for (LogLevel level : {LogLevel::debug, LogLevel::info, LogLevel::warn, LogLevel::error, LogLevel::off})
    if (level_name(level) == text) return level;
  fail(ErrorCode::invalid_argument, "unknown log level '" + std::string(text) + "'");
}

Logger::Logger(std::ostream* out, LogLevel level) : out_(out ? out : &std::cerr), level_(level) {}

void Logger::write(LogLevel level, std::string_view event, nlohmann::json fields) {
  if (level < level_ || level_ == LogLevel::off) return;
  const auto now = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::system_clock::now().time_since_epoch())
                       .count();
  nlohmann::json line = {{"ts_ms", now}, {"level", level_name(level)}, {"event", event}};
  for (auto& [key, value] : fields.items()) line[key] = std::move(value);
  const std::string text = line.dump();
  std::lock_guard lock(mutex_);
  *out_ << text << '\n';
  out_->flush();
}

}  // namespace netcontrast::service
