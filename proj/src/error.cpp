// SPDX-License-Identifier: Apache-2.0
#include "mcbf/error.hpp"
#include "mcbf/report.hpp"

namespace mcbf {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::ZeroMatrix: return "ZeroMatrix";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::IterLimit: return "IterLimit";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::TooFewAntennas: return "TooFewAntennas";
    case ErrorCode::RandomizationFailed: return "RandomizationFailed";
    case ErrorCode::InfeasibleStart: return "InfeasibleStart";
    case ErrorCode::UnequalTargets: return "UnequalTargets";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

const char* to_string(SolverStatus status) noexcept {
  switch (status) {
    case SolverStatus::Optimal: return "Optimal";
    case SolverStatus::Infeasible: return "Infeasible";
    case SolverStatus::IterLimit: return "IterLimit";
    case SolverStatus::NumericalFailure: return "NumericalFailure";
  }
  return "Unknown";
}

}  // namespace mcbf
