#ifndef SMOOTH_CORE_ERRORS_H_
#define SMOOTH_CORE_ERRORS_H_

#include <stdexcept>
#include <string>

namespace smooth {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Incompatible tensor or vector shapes.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// NaN or Inf produced where a finite value is required.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Violated precondition of an operation.
class ContractError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration, carries the offending line and field when known.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& message, int line = 0,
              std::string field = {})
      : Error(format(message, line, field)), line_(line),
        field_(std::move(field)) {}

  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  static std::string format(const std::string& message, int line,
                            const std::string& field) {
    std::string out;
    if (line > 0) out += "line " + std::to_string(line) + ": ";
    if (!field.empty()) out += "[" + field + "] ";
    return out + message;
  }

  int line_;
  std::string field_;
};

}  // namespace smooth

#endif  // SMOOTH_CORE_ERRORS_H_
