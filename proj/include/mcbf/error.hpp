// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace mcbf {

enum class ErrorCode {
  NotPositiveDefinite,
  ZeroMatrix,
  DimensionMismatch,
  InvalidArgument,
  Infeasible,
  IterLimit,
  NumericalFailure,
  TooFewAntennas,
  RandomizationFailed,
  InfeasibleStart,
  UnequalTargets,
  ParseError,
};

const char* to_string(ErrorCode code) noexcept;

/// Exception type thrown by every library operation that cannot produce a
/// result. Iterative solvers in numerics report convergence outcomes through
/// SolverReport::status instead of throwing.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mcbf
