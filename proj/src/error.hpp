#pragma once

#include <stdexcept>
#include <string>

namespace hifi {

// Values double as CLI exit codes and C API status codes.
enum class ErrorCode : int {
  kConfig = 1,
  kIo = 2,
  kNumeric = 3,
  kArgument = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace hifi
