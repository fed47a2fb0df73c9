#pragma once

#include <stdexcept>
#include <string>

namespace hypnos {

// Error taxonomy shared across the library. `kind` is stable and machine
// readable; the CLI maps InputError-category codes to exit 2 and validation
// codes to exit 3.
enum class ErrorCode {
  EmptyRecording,
  LengthMismatch,
  TooFewRaters,
  TooShort,
  MalformedTree,
  MissingChannel,
  ShapeMismatch,
  EmptyEnsemble,
  InsufficientContext,
  NoCleanChannel,
  TooFewBreaths,
  AllMasked,
  EmptyCorpus,
  AllUnscored,
  ZeroPower,
  EmptyMatrix,
  DegenerateMarginals,
  NonPositiveValue,
  ZeroVariance,
  GapLongerThanSession,
  SpanOutOfRange,
  InfeasibleProportions,
  TooFewContents,
  FormatError,
  RateMismatch,
  ChannelMissing,
  ConfigError,
  IoError,
};

const char* error_code_name(ErrorCode code);

// True for errors caused by bad input files / CLI arguments (exit code 2);
// everything else is a validation failure (exit code 3).
bool is_input_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + msg),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& msg) {
  throw Error(code, msg);
}

}  // namespace hypnos
