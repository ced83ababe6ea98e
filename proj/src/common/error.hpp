#pragma once

#include <stdexcept>
#include <string>

namespace inpaint_lab {

// Bad input: malformed config, out-of-range parameter, shape mismatch.
// Maps to exit code 1 / IL_ERR_VALIDATION.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Failure while doing the work: I/O, non-finite loss, architecture mismatch
// on load. Maps to exit code 2 / IL_ERR_RUNTIME.
class RuntimeFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

[[noreturn]] inline void fail_validation(const std::string& msg) {
  throw ValidationError(msg);
}

[[noreturn]] inline void fail_runtime(const std::string& msg) {
  throw RuntimeFailure(msg);
}

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ValidationError(msg);
}

}  // namespace inpaint_lab
