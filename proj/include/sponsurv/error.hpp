#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace sponsurv {

// Validation errors are bad inputs (exit code 1 in the CLI); numeric errors
// are failures of the estimation machinery on otherwise valid inputs (exit 2).
enum class ErrorClass { validation, numeric };

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, std::string code, const std::string& message)
      : std::runtime_error(message), class_(cls), code_(std::move(code)) {}

  static Error validation(std::string code, const std::string& message) {
    return Error(ErrorClass::validation, std::move(code), message);
  }
  static Error numeric(std::string code, const std::string& message) {
    return Error(ErrorClass::numeric, std::move(code), message);
  }

  const std::string& code() const { return code_; }
  ErrorClass error_class() const { return class_; }

  // One-line machine-parsable rendering used on every CLI error path.
  std::string diagnostic() const {
    return "error[" + code_ + "]: " + what();
  }

 private:
  ErrorClass class_;
  std::string code_;
};

}  // namespace sponsurv
