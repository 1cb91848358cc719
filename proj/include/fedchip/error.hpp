#pragma once

#include <stdexcept>
#include <string>

namespace fedchip {

enum class ErrorKind {
  kValidation,  // input violates a documented invariant
  kParse,       // malformed text (JSONL line, report, config)
  kIo,          // filesystem failure
  kDomain,      // arguments outside a function's mathematical domain
};

// Single exception type for the library. The C API maps `kind()` onto its
// status codes and the CLI maps those onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error validation_error(const std::string& m) {
  return Error(ErrorKind::kValidation, m);
}
inline Error parse_error(const std::string& m) {
  return Error(ErrorKind::kParse, m);
}
inline Error io_error(const std::string& m) { return Error(ErrorKind::kIo, m); }
inline Error domain_error(const std::string& m) {
  return Error(ErrorKind::kDomain, m);
}

}  // namespace fedchip
