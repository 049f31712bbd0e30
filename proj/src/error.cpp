#include "qrsadapt/error.hpp"

namespace qrsadapt {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::DegenerateFit: return "DegenerateFit";
    case ErrorCode::DegreeTooHigh: return "DegreeTooHigh";
    case ErrorCode::EmptyWavelet: return "EmptyWavelet";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ScaleTooSmall: return "ScaleTooSmall";
    case ErrorCode::SignalTooShort: return "SignalTooShort";
    case ErrorCode::EmptyBank: return "EmptyBank";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::MissingHeader: return "MissingHeader";
    case ErrorCode::BadSample: return "BadSample";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::NotIncreasing: return "NotIncreasing";
    case ErrorCode::BadIndex: return "BadIndex";
    case ErrorCode::BadFormat: return "BadFormat";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

namespace {

std::string decorate(ErrorCode code, const std::string& message,
                     std::optional<std::size_t> line) {
  std::string out(to_string(code));
  if (line) out += "(line " + std::to_string(*line) + ")";
  out += ": ";
  out += message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message,
             std::optional<std::size_t> line)
    : std::runtime_error(decorate(code, message, line)), code_(code), line_(line) {}

}  // namespace qrsadapt
