// SPDX-License-Identifier: Apache-2.0
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mcbf/acceptance.hpp"
#include "mcbf/bench.hpp"
#include "mcbf/error.hpp"
#include "mcbf/validate.hpp"

using namespace mcbf;
using nlohmann::json;

namespace {

struct Loaded {
  SystemConfig cfg;
  ChannelSet ch;
  std::uint64_t seed = 0;
};

Loaded load(const std::string& path, std::optional<std::uint64_t> seed) {
  Scenario sc;
  if (!path.empty()) sc = load_scenario(path);
  Loaded out;
  out.cfg = sc.config;
  out.cfg.validate();
  out.seed = seed.value_or(out.cfg.seed);
  if (sc.channels && !seed) {
    out.ch = *sc.channels;
  } else {
    out.ch = gen_channels(out.cfg, out.seed);
  }
  out.ch.check(out.cfg);
  return out;
}

json interleaved(const CVec& v) {
  json a = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    a.push_back(v(k).real());
    a.push_back(v(k).imag());
  }
  return a;
}

json per_group(const std::vector<CVec>& vs) {
  json a = json::array();
  for (const auto& v : vs) a.push_back(interleaved(v));
  return a;
}

json real_array(const RVec& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json metrics(const BeamformerSet& w, const Loaded& in) {
  const RVec s = sinr(w, in.ch, in.cfg.sigma2);
  const double p = total_power(w);
  return {{"power", p},
          {"power_db", 10.0 * std::log10(p / in.cfg.sigma2)},
          {"sinr_db", real_array(RVec((10.0 * s.array().log10()).matrix()))},
          {"min_sinr_db", 10.0 * std::log10(s.minCoeff())},
          {"min_sinr_ratio", min_sinr_ratio(w, in.ch, in.cfg.gamma(), in.cfg.sigma2)},
          {"feasible", meets_targets(w, in.ch, in.cfg.gamma(), in.cfg.sigma2)}};
}

json report_json(const SolverReport& r) {
  return {{"status", to_string(r.status)}, {"iterations", r.iterations}, {"gap", r.gap},
          {"residual", r.residual},        {"objective", r.objective},   {"wall_ms", r.wall_ms}};
}

void emit(const json& j, const std::string& out) {
  if (out.empty()) {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream f(out);
  if (!f) throw Error(ErrorCode::InvalidArgument, "cannot write '" + out + "'");
  f << j.dump(2) << '\n';
}

void write_text(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out);
  if (!f) throw Error(ErrorCode::InvalidArgument, "cannot write '" + out + "'");
  f << text;
}

json base_result(const Loaded& in, const std::string& method) {
  return {{"config", json::parse(scenario_to_json(Scenario{in.cfg, std::nullopt}))},
          {"method", method},
          {"seed", in.seed}};
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

json solve_qos_cmd(const Loaded& in, const std::string& method, const QosOptions& qos, const DirectOptions& direct) {
  json j = base_result(in, method);
  const RVec gamma = in.cfg.gamma();
  if (method == "direct-sdr" || method == "direct-sca") {
    const auto start = std::chrono::steady_clock::now();
    DirectResult d = direct_sdr_qos(in.ch, gamma, in.cfg.sigma2, direct);
    const double lower_bound = d.lower_bound;
    if (method == "direct-sca") d = direct_sca_qos(in.ch, gamma, in.cfg.sigma2, d.w, direct);
    j["w"] = per_group(d.w);
    j["lambda"] = nullptr;
    j["a"] = nullptr;
    j["metrics"] = metrics(d.w, in);
    j["report"] = report_json(d.report);
    j["report"]["wall_ms"] = elapsed_ms(start);
    j["report"]["lower_bound"] = lower_bound;
    return j;
  }
  const QosResult q = solve_qos(in.ch, gamma, in.cfg.sigma2, parse_qos_method(method), qos);
  j["w"] = per_group(q.solution.w);
  j["lambda"] = real_array(q.solution.lambda);
  j["a"] = per_group(q.solution.weights.a);
  j["consistent"] = q.solution.consistent;
  j["metrics"] = metrics(q.solution.w, in);
  j["metrics"]["power_identity"] = power_identity(q.solution.lambda, gamma, in.cfg.sigma2);
  j["report"] = report_json(q.report);
  j["report"]["lower_bound"] = q.lower_bound;
  j["report"]["lambda_ms"] = q.lambda_ms;
  j["report"]["weights_ms"] = q.weights_ms;
  return j;
}

json solve_mmf_cmd(const Loaded& in, const std::string& method, const MmfOptions& mmf) {
  json j = base_result(in, method);
  const auto start = std::chrono::steady_clock::now();
  switch (parse_mmf_method(method)) {
    case MmfMethod::UpperBound:
      j["upper_bound_t"] = mmf_upper_bound(in.ch, in.cfg, mmf.tol_t);
      j["report"] = {{"wall_ms", elapsed_ms(start)}};
      return j;
    case MmfMethod::CfAsym: {
      const BeamformerSet w = cf_asym_mmf(in.ch, in.cfg);
      j["w"] = per_group(w);
      j["t_star"] = min_sinr_ratio(w, in.ch, in.cfg.gamma(), in.cfg.sigma2);
      j["metrics"] = metrics(w, in);
      j["report"] = {{"wall_ms", elapsed_ms(start)}};
      return j;
    }
    default: break;
  }
  const MmfMethod m = parse_mmf_method(method);
  const MmfResult r = m == MmfMethod::AsymSca
                          ? asym_mmf_sca(in.ch, in.cfg, mmf)
                          : solve_mmf_bisection(in.ch, in.cfg,
                                                m == MmfMethod::QosSdr ? QosMethod::OptSdr : QosMethod::OptSca, mmf);
  j["w"] = per_group(r.w);
  j["t_star"] = r.t_star;
  j["t_qos"] = r.t_qos;
  j["lambda"] = real_array(r.lambda);
  j["metrics"] = metrics(r.w, in);
  j["report"] = report_json(r.report);
  j["report"]["bisection_points"] = r.report.trajectory;
  return j;
}

std::pair<std::string, std::vector<double>> parse_sweep(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw Error(ErrorCode::InvalidArgument, "sweep must look like N=50,100");
  std::vector<double> values;
  std::stringstream ss(text.substr(eq + 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      values.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "bad sweep value '" + item + "'");
    }
  }
  return {text.substr(0, eq), values};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-group multicast beamforming solvers and benchmarks"};
  app.require_subcommand(1);

  std::string config, method, out;
  std::optional<std::uint64_t> seed;
  QosOptions qos;
  DirectOptions direct;
  MmfOptions mmf;

  auto* qos_cmd = app.add_subcommand("solve-qos", "Minimize power under SINR targets");
  qos_cmd->add_option("--config", config, "scenario JSON");
  qos_cmd->add_option("--method", method, "opt-sdr | opt-sca | asym-sca | direct-sdr | direct-sca")->required();
  qos_cmd->add_option("--seed", seed, "channel seed (default: scenario seed)");
  qos_cmd->add_option("--out", out, "result JSON (default: stdout)");
  qos_cmd->add_option("--n-rand", qos.n_rand, "randomization draws");
  qos_cmd->add_flag("--direct-span", direct.span_reduction, "direct baselines in the channel span");

  auto* mmf_cmd = app.add_subcommand("solve-mmf", "Maximize the minimum SINR ratio under a power budget");
  mmf_cmd->add_option("--config", config, "scenario JSON");
  mmf_cmd->add_option("--method", method, "qos2mmf-sdr | qos2mmf-sca | asym-sca | cf-asym | upper-bound")->required();
  mmf_cmd->add_option("--seed", seed, "channel seed (default: scenario seed)");
  mmf_cmd->add_option("--out", out, "result JSON (default: stdout)");
  mmf_cmd->add_option("--tol-t", mmf.tol_t, "bisection tolerance");

  auto* bench_cmd = app.add_subcommand("bench", "Monte Carlo sweep");
  std::string kind, sweep = "N=50,100,200", methods;
  int trials = kDefaultTrials, workers = 0;
  bool full = false, no_timing = false;
  std::uint64_t bench_seed = 1;
  bench_cmd->add_option("kind", kind, "qos | mmf")->required()->check(CLI::IsMember({"qos", "mmf"}));
  bench_cmd->add_option("--config", config, "scenario JSON for the base configuration");
  bench_cmd->add_option("--sweep", sweep, "PARAM=v1,v2,... with PARAM in N, K, G, P_db, gamma_db");
  bench_cmd->add_option("--methods", methods, "comma-separated subset");
  bench_cmd->add_option("--trials", trials, "trials per point");
  bench_cmd->add_flag("--full", full, "full-scale trial count");
  bench_cmd->add_option("--seed", bench_seed, "base seed; trial t uses seed + t");
  bench_cmd->add_option("--workers", workers, "worker threads (0: all cores)");
  bench_cmd->add_flag("--no-timing", no_timing, "write wall_ms = 0");
  bench_cmd->add_flag("--direct-span", direct.span_reduction, "direct baselines in the channel span");
  bench_cmd->add_option("--out", out, "CSV file (default: stdout)");

  auto* validate_cmd = app.add_subcommand("validate", "Run the property suite");
  std::uint64_t validate_seed = 1;
  double corrupt = 0.0;
  std::vector<std::string> only;
  bool acceptance = false;
  validate_cmd->add_option("--seed", validate_seed, "seed");
  validate_cmd->add_option("--corrupt", corrupt, "inject a relative power error into checked outputs");
  validate_cmd->add_option("--only", only, "check name prefixes")->delimiter(',');
  validate_cmd->add_flag("--acceptance", acceptance, "also evaluate the desk-scale acceptance criteria");
  validate_cmd->add_option("--json", out, "write the report as JSON");

  auto* config_cmd = app.add_subcommand("make-config", "Write a scenario file");
  bool with_channels = false;
  SystemConfig made;
  int groups = 3, users = 5;
  double gamma_db = 10.0;
  std::string model = "normalized";
  config_cmd->add_option("--G", groups);
  config_cmd->add_option("--K", users);
  config_cmd->add_option("--N", made.N);
  config_cmd->add_option("--gamma-db", gamma_db);
  config_cmd->add_option("--sigma2", made.sigma2);
  config_cmd->add_option("--P", made.P);
  config_cmd->add_option("--model", model)->check(CLI::IsMember({"normalized", "pathloss"}));
  config_cmd->add_option("--seed", made.seed);
  config_cmd->add_flag("--with-channels", with_channels, "embed the generated channels");
  config_cmd->add_option("--out", out, "scenario JSON (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*qos_cmd) {
      emit(solve_qos_cmd(load(config, seed), method, qos, direct), out);
    } else if (*mmf_cmd) {
      emit(solve_mmf_cmd(load(config, seed), method, mmf), out);
    } else if (*bench_cmd) {
      SweepSpec spec;
      if (!config.empty()) spec.base = load_scenario(config).config;
      std::tie(spec.param_name, spec.values) = parse_sweep(sweep);
      if (!methods.empty()) {
        std::stringstream ss(methods);
        std::string m;
        while (std::getline(ss, m, ',')) spec.methods.push_back(m);
      }
      spec.trials = full ? kFullScaleTrials : trials;
      spec.seed = bench_seed;
      spec.workers = workers;
      spec.timing = !no_timing;
      spec.direct = direct;
      const auto rows = kind == "qos" ? run_qos_sweep(spec) : run_mmf_sweep(spec);
      write_text(to_csv(rows), out);
      (out.empty() ? std::cerr : std::cout) << format_summary(summarize(rows));
      for (const auto& r : rows) {
        if (!r.error.empty()) {
          std::cerr << r.method << ' ' << r.param_name << '=' << r.param_value << " trial " << r.trial << ": "
                    << r.error << '\n';
        }
      }
    } else if (*validate_cmd) {
      ValidateOptions vo;
      vo.seed = validate_seed;
      vo.corrupt = corrupt;
      vo.only = only;
      const ValidateReport rep = validate(vo);
      std::cout << rep.format();
      bool ok = rep.passed();
      if (!out.empty()) write_text(rep.to_json() + "\n", out);
      if (acceptance) {
        AcceptanceOptions ao;
        ao.seed = validate_seed;
        ao.criteria = {1, 2, 3, 4, 5, 6, 7, 8, 9};
        for (const auto& c : run_acceptance(ao)) {
          std::cout << format_criterion(c) << '\n';
          ok = ok && c.pass;
        }
        std::cout << "criterion 10 (solver unit oracles) runs in the test suite\n";
      }
      return ok ? 0 : 1;
    } else if (*config_cmd) {
      Scenario sc;
      sc.config = SystemConfig::uniform(groups, users, made.N, gamma_db);
      sc.config.sigma2 = made.sigma2;
      sc.config.P = made.P;
      sc.config.seed = made.seed;
      sc.config.channel_model = model == "pathloss" ? ChannelModel::Pathloss : ChannelModel::Normalized;
      sc.config.validate();
      if (with_channels) sc.channels = gen_channels(sc.config, sc.config.seed);
      if (out.empty()) {
        std::cout << scenario_to_json(sc) << '\n';
      } else {
        save_scenario(out, sc);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
