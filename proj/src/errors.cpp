#include "hypnos/errors.hpp"

namespace hypnos {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyRecording: return "EmptyRecording";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::TooFewRaters: return "TooFewRaters";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::MalformedTree: return "MalformedTree";
    case ErrorCode::MissingChannel: return "MissingChannel";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::EmptyEnsemble: return "EmptyEnsemble";
    case ErrorCode::InsufficientContext: return "InsufficientContext";
    case ErrorCode::NoCleanChannel: return "NoCleanChannel";
    case ErrorCode::TooFewBreaths: return "TooFewBreaths";
    case ErrorCode::AllMasked: return "AllMasked";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::AllUnscored: return "AllUnscored";
    case ErrorCode::ZeroPower: return "ZeroPower";
    case ErrorCode::EmptyMatrix: return "EmptyMatrix";
    case ErrorCode::DegenerateMarginals: return "DegenerateMarginals";
    case ErrorCode::NonPositiveValue: return "NonPositiveValue";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::GapLongerThanSession: return "GapLongerThanSession";
    case ErrorCode::SpanOutOfRange: return "SpanOutOfRange";
    case ErrorCode::InfeasibleProportions: return "InfeasibleProportions";
    case ErrorCode::TooFewContents: return "TooFewContents";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::RateMismatch: return "RateMismatch";
    case ErrorCode::ChannelMissing: return "ChannelMissing";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "UnknownError";
}

bool is_input_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::FormatError:
    case ErrorCode::RateMismatch:
    case ErrorCode::ChannelMissing:
    case ErrorCode::IoError:
      return true;
    default:
      return false;
  }
}

}  // namespace hypnos
