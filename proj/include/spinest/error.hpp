#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace spinest {

/// Failure categories surfaced by the estimators. The CLI maps these onto
/// exit codes and the machine-readable `error` field of its JSON output.
enum class ErrorKind {
  kInvalidArgument,
  kContractViolation,
  kInsufficientData,
  kRankDeficient,
  kDegenerateGeometry,
  kSpinAxisIndeterminate,
  kInsufficientVisibility,
  kDegenerateCentroid,
  kEmptyContour,
  kNoBounce,
  kParse,
  kIo,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid-argument";
    case ErrorKind::kContractViolation: return "contract-violation";
    case ErrorKind::kInsufficientData: return "insufficient-data";
    case ErrorKind::kRankDeficient: return "rank-deficient";
    case ErrorKind::kDegenerateGeometry: return "degenerate-geometry";
    case ErrorKind::kSpinAxisIndeterminate: return "spin-axis-indeterminate";
    case ErrorKind::kInsufficientVisibility: return "insufficient-visibility";
    case ErrorKind::kDegenerateCentroid: return "degenerate-centroid";
    case ErrorKind::kEmptyContour: return "empty-contour";
    case ErrorKind::kNoBounce: return "no-bounce";
    case ErrorKind::kParse: return "parse-error";
    case ErrorKind::kIo: return "io-error";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Parse failure with the 1-based line number of the offending input row.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error(ErrorKind::kParse,
              "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace spinest
