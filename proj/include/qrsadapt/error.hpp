#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qrsadapt {

enum class ErrorCode {
  TooFewSamples,
  NonFiniteInput,
  DegenerateFit,
  DegreeTooHigh,
  EmptyWavelet,
  InvalidArgument,
  ScaleTooSmall,
  SignalTooShort,
  EmptyBank,
  ConfigInvalid,
  MissingHeader,
  BadSample,
  EmptyFile,
  NotIncreasing,
  BadIndex,
  BadFormat,
  IoFailure,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported through this type. Parsers attach the
// 1-based line number of the offending line.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> line = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> line_;
};

}  // namespace qrsadapt
