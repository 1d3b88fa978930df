#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace predind {

enum class ErrorCode {
  InvalidInput,
  InvalidPredicate,
  UnknownDimension,
  Format,
  EmptyDataset,
  MissingProjection,
  DegenerateProjection,
  EmptySelection,
  Divergence,
  Timeout,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidInput: return "invalid_input";
    case ErrorCode::InvalidPredicate: return "invalid_predicate";
    case ErrorCode::UnknownDimension: return "unknown_dimension";
    case ErrorCode::Format: return "format_error";
    case ErrorCode::EmptyDataset: return "empty_dataset";
    case ErrorCode::MissingProjection: return "missing_projection";
    case ErrorCode::DegenerateProjection: return "degenerate_projection";
    case ErrorCode::EmptySelection: return "empty_selection";
    case ErrorCode::Divergence: return "divergence";
    case ErrorCode::Timeout: return "timeout";
  }
  return "unknown";
}

// Every failure raised by the library carries a code so that the service and
// CLI can map it to an HTTP status or exit code without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string detail = {})
      : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace predind
