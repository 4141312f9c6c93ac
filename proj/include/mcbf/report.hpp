// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace mcbf {

enum class SolverStatus { Optimal, Infeasible, IterLimit, NumericalFailure };

const char* to_string(SolverStatus status) noexcept;

struct SolverReport {
  SolverStatus status = SolverStatus::Optimal;
  int iterations = 0;
  double gap = 0.0;       // duality gap / relative decrease at exit
  double residual = 0.0;  // feasibility or fixed-point residual at exit
  double objective = 0.0;
  double wall_ms = 0.0;
  std::vector<double> trajectory;  // objective (or residual) per outer iteration

  bool ok() const noexcept { return status == SolverStatus::Optimal; }
};

}  // namespace mcbf
