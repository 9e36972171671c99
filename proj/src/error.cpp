#include "cartoonkit/error.hpp"

namespace cartoonkit {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kDimensionMismatch: return "dimension mismatch";
    case ErrorCode::kFileNotFound: return "file not found";
    case ErrorCode::kUnsupportedFormat: return "unsupported format";
    case ErrorCode::kDecodeError: return "decode error";
    case ErrorCode::kIoError: return "i/o error";
    case ErrorCode::kConfigError: return "config error";
    case ErrorCode::kNumericalError: return "numerical error";
  }
  return "unknown error";
}

}  // namespace cartoonkit
