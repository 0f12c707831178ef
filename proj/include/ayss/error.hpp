#pragma once

#include <stdexcept>
#include <string>

namespace ayss {

/// Invalid or inconsistent configuration (bad bounds, unknown keys, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Failure while running a pipeline stage (divergence, unreadable artifact).
class RuntimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void require_finite(double value, const char* what);

}  // namespace ayss
