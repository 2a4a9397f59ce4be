#pragma once

#include <stdexcept>
#include <string>

namespace evc {

// Stable error categories. The C API maps each one onto an evc_status value,
// so the numbering here must stay in sync with evc.h.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kIo = 2,
  kFormat = 3,
  kUnsupportedChannels = 4,
  kUnsupportedDepth = 5,
  kTooShort = 6,
  kInsufficientData = 7,
  kDegenerate = 8,
  kUndefined = 9,
  kLookup = 10,
  kSchema = 11,
  kInternal = 12,
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

inline void Require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) Fail(code, what);
}

}  // namespace evc
