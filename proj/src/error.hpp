#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace netcontrast {

enum class ErrorCode {
  invalid_argument,
  parse_error,
  not_found,
  numerical,
  io,
  cancelled,
  limit,
  internal,
};

std::string_view to_string(ErrorCode code);

/// Base exception for everything the core throws on purpose.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Iterative solver stopped at max_iter. Carries the last iterate so callers
/// can inspect how far it got.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& message, std::vector<double> last_iterate)
      : Error(ErrorCode::numerical, message), last_iterate_(std::move(last_iterate)) {}

  const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }

 private:
  std::vector<double> last_iterate_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace netcontrast
