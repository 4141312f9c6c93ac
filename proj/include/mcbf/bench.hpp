// SPDX-License-Identifier: Apache-2.0
//
// Monte Carlo sweeps over one configuration parameter. Every row is the
// outcome of one library call on channels drawn from gen_channels(cfg, seed).
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mcbf/direct.hpp"
#include "mcbf/mmf.hpp"

namespace mcbf {

inline constexpr int kDefaultTrials = 20;
inline constexpr int kFullScaleTrials = 100;

struct SweepSpec {
  SystemConfig base;
  std::vector<std::string> methods;  // empty: all methods of the sweep kind
  std::string param_name = "N";      // N, K, G, P_db or gamma_db
  std::vector<double> values;
  int trials = kDefaultTrials;
  std::uint64_t seed = 1;
  int workers = 0;      // 0: hardware concurrency
  bool timing = true;   // false writes wall_ms = 0 for byte-stable output
  QosOptions qos{};
  DirectOptions direct{};
  MmfOptions mmf{};
};

struct BenchRow {
  std::string method;
  std::string param_name;
  double param_value = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;  // channel seed of the instance
  double objective_db = 0.0;
  double power_db = 0.0;
  double min_sinr_db = 0.0;
  bool feasible = false;
  int iters = 0;
  double wall_ms = 0.0;
  std::string error;  // empty when the call returned
};

std::vector<std::string> qos_bench_methods();  // opt-sdr opt-sca asym-sca direct-sdr direct-sca lower-bound
std::vector<std::string> mmf_bench_methods();  // qos2mmf-sdr qos2mmf-sca asym-sca cf-asym upper-bound

/// Copy of base with one parameter replaced; K and G keep every group at K users.
SystemConfig apply_param(const SystemConfig& base, const std::string& name, double value);
std::uint64_t instance_seed(std::uint64_t seed, int trial);

/// Rows ordered by (method, parameter, trial). Per-instance failures become rows with error set.
std::vector<BenchRow> run_qos_sweep(const SweepSpec& spec);
std::vector<BenchRow> run_mmf_sweep(const SweepSpec& spec);

/// One instance, all requested methods, no threading.
std::vector<BenchRow> run_qos_instance(const SystemConfig& cfg, const std::vector<std::string>& methods,
                                       const SweepSpec& spec, const std::string& param_name, double param_value,
                                       int trial);
std::vector<BenchRow> run_mmf_instance(const SystemConfig& cfg, const std::vector<std::string>& methods,
                                       const SweepSpec& spec, const std::string& param_name, double param_value,
                                       int trial);

std::string csv_header();
std::string to_csv(const std::vector<BenchRow>& rows);

struct SummaryRow {
  std::string method;
  double param_value = 0.0;
  int count = 0;     // rows in the cell
  int ok = 0;        // rows that produced a value
  double mean_db = 0.0;
  double stderr_db = 0.0;
  double mean_wall_ms = 0.0;
};

/// Mean and standard error of objective_db per (method, parameter) over rows without error.
std::vector<SummaryRow> summarize(const std::vector<BenchRow>& rows);
std::string format_summary(const std::vector<SummaryRow>& summary);

}  // namespace mcbf
