#pragma once

#include <stdexcept>
#include <string>

namespace disent {

// Numeric values are part of the C ABI (see disent.h); append only.
enum class ErrorCode : int {
  kShape = 1,
  kParameter = 2,
  kInsufficientSamples = 3,
  kSingleClassBatch = 4,
  kDataBalance = 5,
  kParse = 6,
  kIo = 7,
  kConfig = 8,
  kNumeric = 9,
  kUndefinedCorrelation = 10,
  kDegenerate = 11,
  kInternal = 99,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace disent
