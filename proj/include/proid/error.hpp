#pragma once

#include <stdexcept>
#include <string>

namespace proid {

enum class ErrorCode {
  InvalidArgument,
  Dimension,
  InvalidUip,
  DegenerateContrast,
  InvalidCenter,
  EmptyGraph,
  ContractViolation,
  WindowTooTight,
  NoPath,
  AnchorNode,
  HalfFailure,
  DegenerateBand,
  FlatVolume,
  Geometry,
  InfiniteCnr,
  Domain,
  InsufficientData,
  StartSelection,
  Spec,
  Io,
  Harness,
};

const char* to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries a machine-readable code so
/// callers (CLI exit codes, HTTP status mapping, fallbacks) can branch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace proid
