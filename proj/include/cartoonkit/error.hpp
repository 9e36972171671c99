#pragma once

#include <stdexcept>
#include <string>

namespace cartoonkit {

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kFileNotFound,
  kUnsupportedFormat,
  kDecodeError,
  kIoError,
  kConfigError,
  kNumericalError,
};

const char* to_string(ErrorCode code);

/// Exception type thrown by every cartoonkit module. The code lets callers
/// (and the CLI's exit status) distinguish failure classes without parsing
/// the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cartoonkit
