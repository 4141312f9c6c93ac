// SPDX-License-Identifier: Apache-2.0
//
// Desk-scale acceptance criteria evaluated on seeded Monte Carlo sweeps.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mcbf/bench.hpp"
#include "mcbf/validate.hpp"

namespace mcbf {

struct AcceptanceOptions {
  std::uint64_t seed = 1;
  int trials = kDefaultTrials;
  int mmf_feasibility_trials = 5;  // iterative MMF methods in the feasibility suite
  int workers = 0;
  std::vector<int> criteria;       // empty: every criterion implemented here
};

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::vector<CheckResult> parts;
  double seconds = 0.0;  // wall time spent on the criterion's own computations
};

/// Criteria 1-9 and 11; criterion 10 consists of the solver unit oracles.
std::vector<int> acceptance_criteria();
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options = {});
std::string format_criterion(const CriterionResult& result);

}  // namespace mcbf
