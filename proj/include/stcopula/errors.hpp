#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace stcopula {

// Exit-code families used by the CLI: config 2, data 3, numeric 4.
enum class ErrorCategory { Config = 2, Data = 3, Numeric = 4 };

// Single exception type carrying a machine-parseable kind tag
// (e.g. "UnknownStation", "InsufficientPairs") plus a human message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, std::string kind, const std::string& message)
      : std::runtime_error(kind + ": " + message),
        category_(category),
        kind_(std::move(kind)) {}

  ErrorCategory category() const { return category_; }
  const std::string& kind() const { return kind_; }

 private:
  ErrorCategory category_;
  std::string kind_;
};

inline Error config_error(const std::string& kind, const std::string& msg) {
  return Error(ErrorCategory::Config, kind, msg);
}
inline Error data_error(const std::string& kind, const std::string& msg) {
  return Error(ErrorCategory::Data, kind, msg);
}
inline Error numeric_error(const std::string& kind, const std::string& msg) {
  return Error(ErrorCategory::Numeric, kind, msg);
}

}  // namespace stcopula
