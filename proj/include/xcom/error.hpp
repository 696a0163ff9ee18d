#ifndef XCOM_ERROR_HPP_
#define XCOM_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace xcom {

enum class ErrorCode {
  kParseError,
  kMissingField,
  kUserMismatch,
  kEmptyCorpus,
  kInvalidConfig,
  kBadRatios,
  kDegenerateLabels,
  kEmptyTraining,
  kEmptyAspectSet,
  kScoreOutOfRange,
  kEmptySide,
  kDimMismatch,
  kNonFiniteLogits,
  kWidthMismatch,
  kTooManyTokens,
  kZeroPermutations,
  kLengthMismatch,
  kEmptyEvaluation,
  kEmptyTestSet,
  kUnknownVariant,
  kIo,
};

inline std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kMissingField: return "MissingField";
    case ErrorCode::kUserMismatch: return "UserMismatch";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kBadRatios: return "BadRatios";
    case ErrorCode::kDegenerateLabels: return "DegenerateLabels";
    case ErrorCode::kEmptyTraining: return "EmptyTraining";
    case ErrorCode::kEmptyAspectSet: return "EmptyAspectSet";
    case ErrorCode::kScoreOutOfRange: return "ScoreOutOfRange";
    case ErrorCode::kEmptySide: return "EmptySide";
    case ErrorCode::kDimMismatch: return "DimMismatch";
    case ErrorCode::kNonFiniteLogits: return "NonFiniteLogits";
    case ErrorCode::kWidthMismatch: return "WidthMismatch";
    case ErrorCode::kTooManyTokens: return "TooManyTokens";
    case ErrorCode::kZeroPermutations: return "ZeroPermutations";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kEmptyEvaluation: return "EmptyEvaluation";
    case ErrorCode::kEmptyTestSet: return "EmptyTestSet";
    case ErrorCode::kUnknownVariant: return "UnknownVariant";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

// Errors caused by bad user input (files, flags, configs) as opposed to
// failures during computation. The CLI maps these to distinct exit codes.
inline bool IsValidationError(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParseError:
    case ErrorCode::kMissingField:
    case ErrorCode::kUserMismatch:
    case ErrorCode::kEmptyCorpus:
    case ErrorCode::kInvalidConfig:
    case ErrorCode::kBadRatios:
    case ErrorCode::kUnknownVariant:
    case ErrorCode::kIo:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, long line = -1)
      : std::runtime_error(Format(code, message, line)),
        code_(code),
        line_(line) {}

  ErrorCode code() const { return code_; }
  // 1-based input line for file-level errors, -1 otherwise.
  long line() const { return line_; }

 private:
  static std::string Format(ErrorCode code, const std::string& message,
                            long line) {
    std::string out(ErrorCodeName(code));
    if (line >= 0) out += " (line " + std::to_string(line) + ")";
    if (!message.empty()) out += ": " + message;
    return out;
  }

  ErrorCode code_;
  long line_;
};

}  // namespace xcom

#endif  // XCOM_ERROR_HPP_
