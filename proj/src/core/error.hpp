#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hsi {

// Mirrors hsi_status in the C API one-to-one (same numeric values).
enum class ErrorCode {
  DimensionMismatch = 1,
  NonFiniteValue,
  LabelOutOfRange,
  BadMagic,
  BadHeader,
  TruncatedPayload,
  HeaderTooLarge,
  IoFailure,
  BandOutOfRange,
  PaletteTooSmall,
  EmptyClass,
  FractionTooSmall,
  NonFiniteLoss,
  TooManySuperpixels,
  EmptySegment,
  EmptyMask,
  InvalidArgument,
  InvalidConfig,
  Internal,
};

std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace hsi
