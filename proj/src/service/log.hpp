#pragma once

#include <mutex>
#include <ostream>
#include <string_view>

#include <nlohmann/json.hpp>

namespace netcontrast::service {

enum class LogLevel { debug, info, warn, error, off };

LogLevel log_level_from_string(std::string_view text);

/// One JSON object per line.
class Logger {
 public:
  explicit Logger(std::ostream* out = nullptr, LogLevel level = LogLevel::info);

  void set_level(LogLevel level) { level_ = level; }
  void write(LogLevel level, std::string_view event, nlohmann::json fields = nlohmann::json::object());

 private:
  std::ostream* out_;
  LogLevel level_;
  std::mutex mutex_;
};

}  // namespace netcontrast::service
