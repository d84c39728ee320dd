#pragma once

#include <stdexcept>
#include <string>

namespace itas {

// Every failure raised by the library carries one of these kinds. The CLI maps
// kinds onto process exit codes (see exit_code_for).
enum class ErrorKind {
  kShape,
  kFormat,
  kLabeling,
  kConsistency,
  kDomain,
  kData,
  kPool,
  kCache,
  kBudget,
  kLabelSpace,
  kModelLabelMismatch,
  kDeterminism,
  kNumeric,
  kConfig,
  kIo,
  kPairing,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + " error: " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

// 0 is success; 1 is reserved for unexpected failures.
int exit_code_for(ErrorKind kind);

}  // namespace itas
