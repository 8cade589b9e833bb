#pragma once

#include <stdexcept>
#include <string>

namespace kaplansky {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  NonFinite,
  InvalidPartition,
  NotSelfAdjoint,
  NotPositive,
  NotProjection,
  NotReal,
  MalformedParts,
  NotSolvable,
  Inconsistent,
  Parse,
  Schema,
};

const char* to_string(ErrorCode code) noexcept;

// All core operations report contract violations through this type; the C
// API maps the code onto its status enum.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace kaplansky
