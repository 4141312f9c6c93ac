// SPDX-License-Identifier: Apache-2.0
//
// Self-check suite: every module property evaluated on seeded instances,
// reported as measured value against its limit.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mcbf {

struct CheckResult {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double limit = 0.0;
  bool upper = true;  // pass requires value <= limit, otherwise value >= limit
  std::string detail;

  double margin() const { return upper ? limit - value : value - limit; }
};

CheckResult check_at_most(std::string name, double value, double limit, std::string detail = {});
CheckResult check_at_least(std::string name, double value, double limit, std::string detail = {});

struct ValidateOptions {
  std::uint64_t seed = 1;
  double corrupt = 0.0;           // relative power error injected into checked outputs
  std::vector<std::string> only;  // name prefixes; empty runs everything
};

struct ValidateReport {
  std::vector<CheckResult> checks;
  bool passed() const;
  std::string format() const;
  std::string to_json() const;
};

std::vector<std::string> validate_check_names();
ValidateReport validate(const ValidateOptions& options = {});

}  // namespace mcbf
