#include "disent/error.hpp"

namespace disent {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kShape: return "shape_error";
    case ErrorCode::kParameter: return "parameter_error";
    case ErrorCode::kInsufficientSamples: return "insufficient_samples";
    case ErrorCode::kSingleClassBatch: return "single_class_batch";
    case ErrorCode::kDataBalance: return "data_balance_error";
    case ErrorCode::kParse: return "parse_error";
    case ErrorCode::kIo: return "io_error";
    case ErrorCode::kConfig: return "config_error";
    case ErrorCode::kNumeric: return "numeric_error";
    case ErrorCode::kUndefinedCorrelation: return "undefined_correlation";
    case ErrorCode::kDegenerate: return "degenerate_covariance";
    case ErrorCode::kInternal: return "internal_error";
  }
  return "unknown_error";
}

}  // namespace disent
