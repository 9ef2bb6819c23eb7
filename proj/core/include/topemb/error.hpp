#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace topemb {

enum class ErrorCode {
  MissingFile,
  InvalidManifest,
  HeaderMismatch,
  CorruptPayload,
  ZeroVector,
  InvalidArgument,
  TooFewPoints,
  NotSymmetric,
  NoConvergence,
  SingleClass,
  KTooLarge,
  NonFinite,
  BatchTooSmall,
  TooFewClusters,
  IoError,
};

std::string_view to_string(ErrorCode code);

// All toolkit failures surface as this exception; `code()` is what the CLI
// writes into its machine-readable error report.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace topemb
