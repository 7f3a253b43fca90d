#pragma once

#include <stdexcept>
#include <string>

#include "error.hpp"

namespace netcontrast::service {

/// Protocol-level failure with a machine-readable code.
class ServiceError : public std::runtime_error {
 public:
  ServiceError(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

}  // namespace netcontrast::service
