#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sigmalab {

enum class ErrorCode {
  InvalidArgument,
  NonPositiveRadius,
  InsufficientSamples,
  MeshQualityFailure,
  MeshFormat,
  NotStrictlyConvex,
  SingularMatrix,
  InvariantViolation,
  A0OutOfRange,
  SolveFailure,
  SingularSystem,
  MeshMismatch,
  InsufficientBins,
  OriginDerivative,
  ODEStep,
  Infeasible,
  OrderingViolation,
  ConfigError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sigmalab
