// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "mcbf/bench.hpp"
#include "mcbf/error.hpp"
#include "mcbf/scenario.hpp"

using namespace mcbf;

namespace {

SweepSpec small_spec() {
  SweepSpec spec;
  spec.base = SystemConfig::uniform(2, 2, 8);
  spec.methods = {"opt-sdr", "opt-sca", "direct-sdr", "direct-sca", "lower-bound"};
  spec.values = {6, 8};
  spec.trials = 2;
  spec.timing = false;
  spec.workers = 1;
  return spec;
}

struct Run {
  int code;
  std::string out;
};

Run run_cli(const std::string& args) {
  const std::string cmd = std::string(MCBF_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {-1, ""};
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::filesystem::path temp_dir() {
  auto dir = std::filesystem::temp_directory_path() / ("mcbf_test_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Bench, ApplyParam) {
  const auto base = SystemConfig::uniform(3, 5, 50);
  EXPECT_EQ(apply_param(base, "N", 64).N, 64);
  const auto k = apply_param(base, "K", 2);
  EXPECT_EQ(k.K, std::vector<int>(3, 2));
  EXPECT_EQ(k.gamma_db.size(), 6u);
  const auto g = apply_param(base, "G", 4);
  EXPECT_EQ(g.G, 4);
  EXPECT_EQ(g.k_tot(), 20);
  EXPECT_NEAR(apply_param(base, "P_db", 20).P, 100.0 * base.sigma2, 1e-12);
  const auto gd = apply_param(base, "gamma_db", 3);
  for (double v : gd.gamma_db) EXPECT_DOUBLE_EQ(v, 3.0);
  EXPECT_THROW(apply_param(base, "nope", 1), Error);
  EXPECT_EQ(instance_seed(7, 3), 10u);
}

TEST(Bench, CsvShapeAndOrdering) {
  const auto rows = run_qos_sweep(small_spec());
  ASSERT_EQ(rows.size(), 5u * 2u * 2u);
  const std::string csv = to_csv(rows);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, csv_header());
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 20);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& a = rows[r - 1];
    const auto& b = rows[r];
    if (a.method == b.method) {
      EXPECT_TRUE(a.param_value < b.param_value || (a.param_value == b.param_value && a.trial < b.trial));
    }
  }
  for (const auto& r : rows) {
    EXPECT_EQ(r.wall_ms, 0.0);
    EXPECT_EQ(r.seed, instance_seed(1, r.trial));
  }
}

TEST(Bench, DeterministicAcrossWorkerCounts) {
  auto spec = small_spec();
  const std::string a = to_csv(run_qos_sweep(spec));
  const std::string b = to_csv(run_qos_sweep(spec));
  spec.workers = 3;
  const std::string c = to_csv(run_qos_sweep(spec));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
}

TEST(Bench, UnicastSweepMatchesReference) {
  SweepSpec spec;
  spec.base = SystemConfig::uniform(3, 1, 8);
  spec.methods = {"opt-sdr", "opt-sca", "direct-sdr", "direct-sca"};
  spec.values = {6, 10};
  spec.trials = 3;
  spec.timing = false;
  for (const auto& r : run_qos_sweep(spec)) {
    ASSERT_TRUE(r.error.empty()) << r.method << ": " << r.error;
    const auto cfg = apply_param(spec.base, "N", r.param_value);
    const auto ch = gen_channels(cfg, r.seed);
    const double ref = 10.0 * std::log10(total_power(unicast_reference(ch, cfg.gamma(), cfg.sigma2).w) / cfg.sigma2);
    EXPECT_NEAR(r.objective_db, ref, 1e-3) << r.method << " N=" << r.param_value << " trial " << r.trial;
    EXPECT_TRUE(r.feasible);
  }
}

TEST(Bench, LowerBoundBelowMethods) {
  const auto rows = run_qos_sweep(small_spec());
  for (const auto& lb : rows) {
    if (lb.method != "lower-bound" || !lb.error.empty()) continue;
    for (const auto& r : rows) {
      if (r.method == "lower-bound" || !r.error.empty()) continue;
      if (r.param_value == lb.param_value && r.trial == lb.trial) EXPECT_LE(lb.objective_db, r.objective_db + 1e-6);
    }
  }
}

TEST(Bench, Summarize) {
  std::vector<BenchRow> rows(4);
  const double v[4] = {1.0, 2.0, 3.0, 0.0};
  for (int i = 0; i < 4; ++i) {
    rows[static_cast<std::size_t>(i)].method = "m";
    rows[static_cast<std::size_t>(i)].param_value = 10;
    rows[static_cast<std::size_t>(i)].trial = i;
    rows[static_cast<std::size_t>(i)].objective_db = v[i];
  }
  rows[3].error = "Infeasible: x";
  const auto s = summarize(rows);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].count, 4);
  EXPECT_EQ(s[0].ok, 3);
  EXPECT_DOUBLE_EQ(s[0].mean_db, 2.0);
  EXPECT_NEAR(s[0].stderr_db, 1.0 / std::sqrt(3.0), 1e-12);
  EXPECT_NE(format_summary(s).find("m"), std::string::npos);
}

TEST(Bench, MmfRowEqualsDirectCall) {
  SweepSpec spec;
  spec.base = SystemConfig::uniform(2, 2, 8);
  spec.methods = {"qos2mmf-sca", "cf-asym", "upper-bound"};
  spec.values = {8};
  spec.trials = 1;
  spec.timing = false;
  const auto rows = run_mmf_sweep(spec);
  ASSERT_EQ(rows.size(), 3u);
  const auto cfg = apply_param(spec.base, "N", 8);
  const auto ch = gen_channels(cfg, rows[0].seed);
  for (const auto& r : rows) {
    ASSERT_TRUE(r.error.empty()) << r.error;
    double t = 0.0;
    if (r.method == "qos2mmf-sca") t = solve_mmf_bisection(ch, cfg, QosMethod::OptSca, spec.mmf).t_star;
    if (r.method == "cf-asym") t = min_sinr_ratio(cf_asym_mmf(ch, cfg), ch, cfg.gamma(), cfg.sigma2);
    if (r.method == "upper-bound") {
      t = mmf_upper_bound(ch, cfg, spec.mmf.tol_t);
      EXPECT_TRUE(std::isnan(r.min_sinr_db));
    }
    EXPECT_NEAR(r.objective_db, 10.0 * std::log10(t), 1e-12) << r.method;
  }
}

TEST(Cli, SolveQosMatchesLibrary) {
  const auto dir = temp_dir();
  const auto cfg_path = (dir / "cfg.json").string();
  const auto out_path = (dir / "res.json").string();
  ASSERT_EQ(run_cli("make-config --G 2 --K 2 --N 8 --seed 3 --out " + cfg_path).code, 0);
  ASSERT_EQ(run_cli("solve-qos --config " + cfg_path + " --method opt-sca --seed 3 --out " + out_path).code, 0);
  std::ifstream f(out_path);
  const auto j = nlohmann::json::parse(f);
  const auto cfg = load_scenario(cfg_path).config;
  const auto ch = gen_channels(cfg, 3);
  const auto q = solve_qos(ch, cfg, QosMethod::OptSca);
  EXPECT_NEAR(j["metrics"]["power"].get<double>(), q.power, 1e-9 * q.power);
  EXPECT_TRUE(j["metrics"]["feasible"].get<bool>());
  std::filesystem::remove_all(dir);
}

TEST(Cli, BenchCsvEqualsLibrary) {
  const auto dir = temp_dir();
  const auto cfg_path = (dir / "cfg.json").string();
  const auto csv_path = (dir / "out.csv").string();
  ASSERT_EQ(run_cli("make-config --G 2 --K 2 --N 8 --out " + cfg_path).code, 0);
  ASSERT_EQ(run_cli("bench qos --config " + cfg_path +
                    " --sweep N=6,8 --methods opt-sdr,opt-sca --trials 2 --no-timing --workers 1 --out " + csv_path)
                .code,
            0);
  std::ifstream f(csv_path);
  std::stringstream text;
  text << f.rdbuf();
  SweepSpec spec;
  spec.base = load_scenario(cfg_path).config;
  spec.methods = {"opt-sdr", "opt-sca"};
  spec.values = {6, 8};
  spec.trials = 2;
  spec.timing = false;
  EXPECT_EQ(text.str(), to_csv(run_qos_sweep(spec)));
  std::filesystem::remove_all(dir);
}

TEST(Cli, ValidateDetectsCorruption) {
  EXPECT_EQ(run_cli("validate --only qos.power_identity").code, 0);
  const auto bad = run_cli("validate --only qos.power_identity --corrupt 0.01");
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.out.find("FAIL"), std::string::npos);
}

TEST(Cli, BadArgumentsExitNonzero) {
  EXPECT_NE(run_cli("solve-qos --config /nonexistent.json").code, 0);
  EXPECT_NE(run_cli("bench qos --sweep X=1").code, 0);
}
