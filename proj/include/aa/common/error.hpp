#pragma once

#include <stdexcept>
#include <string>

namespace aa {

// Machine-readable error category. The CLI prints it as the first field of the
// one-line error message and the service maps it onto an HTTP status.
enum class ErrorCode {
  kInvalidArgument,
  kNotFound,
  kConflict,
  kParse,
  kIo,
  kPrecondition,
  kReplayMismatch,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kConflict: return "conflict";
    case ErrorCode::kParse: return "parse_error";
    case ErrorCode::kIo: return "io_error";
    case ErrorCode::kPrecondition: return "precondition_failed";
    case ErrorCode::kReplayMismatch: return "replay_mismatch";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Prefixes an error message with the pipeline stage that raised it.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& inner)
      : Error(inner.code(), stage + ": " + inner.what()), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace aa
