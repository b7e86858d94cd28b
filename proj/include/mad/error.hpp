#pragma once

#include <stdexcept>
#include <string>

namespace mad {

// Failure categories; the CLI maps them onto exit codes 1, 2 and 3.
enum class ErrorKind { usage, data, numerical };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error usage_error(const std::string& message) {
  return Error(ErrorKind::usage, message);
}
inline Error data_error(const std::string& message) {
  return Error(ErrorKind::data, message);
}
inline Error numerical_error(const std::string& message) {
  return Error(ErrorKind::numerical, message);
}

const char* to_string(ErrorKind kind) noexcept;
int exit_code(ErrorKind kind) noexcept;

}  // namespace mad
