// SPDX-License-Identifier: Apache-2.0
#include "mcbf/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include "mcbf/error.hpp"

namespace mcbf {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double db(double x) { return 10.0 * std::log10(x); }

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

BenchRow blank_row(const std::string& method, const std::string& param_name, double param_value, int trial,
                   std::uint64_t seed) {
  BenchRow r;
  r.method = method;
  r.param_name = param_name;
  r.param_value = param_value;
  r.trial = trial;
  r.seed = seed;
  r.objective_db = r.power_db = r.min_sinr_db = kNan;
  return r;
}

void fill_qos(BenchRow& r, const BeamformerSet& w, const ChannelSet& ch, const RVec& gamma, double sigma2, int iters) {
  r.power_db = db(total_power(w) / sigma2);
  r.objective_db = r.power_db;
  r.min_sinr_db = db(sinr(w, ch, sigma2).minCoeff());
  r.feasible = meets_targets(w, ch, gamma, sigma2);
  r.iters = iters;
}

void fill_mmf(BenchRow& r, const BeamformerSet& w, const ChannelSet& ch, const SystemConfig& cfg, int iters) {
  const double p = total_power(w);
  r.power_db = db(p / cfg.sigma2);
  r.objective_db = db(min_sinr_ratio(w, ch, cfg.gamma(), cfg.sigma2));
  r.min_sinr_db = db(sinr(w, ch, cfg.sigma2).minCoeff());
  r.feasible = p <= cfg.P * (1.0 + 1e-8);
  r.iters = iters;
}

using InstanceFn = std::vector<BenchRow> (*)(const SystemConfig&, const std::vector<std::string>&, const SweepSpec&,
                                             const std::string&, double, int);

std::vector<BenchRow> run_sweep(const SweepSpec& spec, const std::vector<std::string>& all_methods, InstanceFn fn) {
  const std::vector<std::string> methods = spec.methods.empty() ? all_methods : spec.methods;
  for (const auto& m : methods) {
    if (std::find(all_methods.begin(), all_methods.end(), m) == all_methods.end()) {
      throw Error(ErrorCode::InvalidArgument, "unknown method '" + m + "'");
    }
  }
  if (spec.trials < 1) throw Error(ErrorCode::InvalidArgument, "trials must be positive");
  if (spec.values.empty()) throw Error(ErrorCode::InvalidArgument, "empty sweep");
  std::vector<SystemConfig> cfgs;
  for (double v : spec.values) {
    cfgs.push_back(apply_param(spec.base, spec.param_name, v));
    cfgs.back().validate();
  }

  const std::size_t n_tasks = cfgs.size() * static_cast<std::size_t>(spec.trials);
  std::vector<std::vector<BenchRow>> results(n_tasks);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < n_tasks; t = next++) {
      const std::size_t p = t / static_cast<std::size_t>(spec.trials);
      const int trial = static_cast<int>(t % static_cast<std::size_t>(spec.trials));
      results[t] = fn(cfgs[p], methods, spec, spec.param_name, spec.values[p], trial);
    }
  };
  unsigned n_workers = spec.workers > 0 ? static_cast<unsigned>(spec.workers) : std::thread::hardware_concurrency();
  n_workers = std::clamp<unsigned>(n_workers, 1u, static_cast<unsigned>(n_tasks));
  {
    std::vector<std::jthread> pool;
    for (unsigned k = 0; k < n_workers; ++k) pool.emplace_back(worker);
  }

  std::vector<BenchRow> rows;
  rows.reserve(n_tasks * methods.size());
  for (std::size_t m = 0; m < methods.size(); ++m) {
    for (const auto& instance : results) rows.push_back(instance[m]);
  }
  if (!spec.timing) {
    for (auto& r : rows) r.wall_ms = 0.0;
  }
  return rows;
}

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

}  // namespace

std::vector<std::string> qos_bench_methods() {
  return {"opt-sdr", "opt-sca", "asym-sca", "direct-sdr", "direct-sca", "lower-bound"};
}

std::vector<std::string> mmf_bench_methods() {
  return {"qos2mmf-sdr", "qos2mmf-sca", "asym-sca", "cf-asym", "upper-bound"};
}

SystemConfig apply_param(const SystemConfig& base, const std::string& name, double value) {
  SystemConfig cfg = base;
  const double first_gamma = base.gamma_db.empty() ? 10.0 : base.gamma_db.front();
  auto as_count = [&] {
    if (value < 1.0 || value != std::floor(value)) {
      throw Error(ErrorCode::InvalidArgument, "parameter " + name + " must be a positive integer");
    }
    return static_cast<int>(value);
  };
  if (name == "N") {
    cfg.N = as_count();
  } else if (name == "K") {
    cfg.K.assign(static_cast<std::size_t>(cfg.G), as_count());
    cfg.gamma_db.assign(static_cast<std::size_t>(cfg.k_tot()), first_gamma);
  } else if (name == "G") {
    const int users = base.K.empty() ? 1 : base.K.front();
    cfg.G = as_count();
    cfg.K.assign(static_cast<std::size_t>(cfg.G), users);
    cfg.gamma_db.assign(static_cast<std::size_t>(cfg.k_tot()), first_gamma);
  } else if (name == "P_db") {
    cfg.P = cfg.sigma2 * std::pow(10.0, value / 10.0);
  } else if (name == "gamma_db") {
    cfg.gamma_db.assign(cfg.gamma_db.size(), value);
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown sweep parameter '" + name + "'");
  }
  return cfg;
}

std::uint64_t instance_seed(std::uint64_t seed, int trial) { return seed + static_cast<std::uint64_t>(trial); }

std::vector<BenchRow> run_qos_instance(const SystemConfig& cfg, const std::vector<std::string>& methods,
                                       const SweepSpec& spec, const std::string& param_name, double param_value,
                                       int trial) {
  const std::uint64_t seed = instance_seed(spec.seed, trial);
  const ChannelSet ch = gen_channels(cfg, seed);
  const RVec gamma = cfg.gamma();

  std::optional<DirectResult> direct;
  std::string direct_error;
  double direct_ms = 0.0;
  auto ensure_direct = [&]() -> const DirectResult& {
    if (!direct && direct_error.empty()) {
      const auto start = Clock::now();
      try {
        direct = direct_sdr_qos(ch, gamma, cfg.sigma2, spec.direct);
      } catch (const std::exception& e) {
        direct_error = e.what();
      }
      direct_ms = ms_since(start);
    }
    if (!direct) throw std::runtime_error(direct_error);
    return *direct;
  };

  std::vector<BenchRow> rows;
  for (const auto& m : methods) {
    BenchRow r = blank_row(m, param_name, param_value, trial, seed);
    try {
      if (m == "opt-sdr" || m == "opt-sca" || m == "asym-sca") {
        const auto start = Clock::now();
        const QosResult q = solve_qos(ch, gamma, cfg.sigma2, parse_qos_method(m), spec.qos);
        r.wall_ms = ms_since(start);
        fill_qos(r, q.solution.w, ch, gamma, cfg.sigma2, q.report.iterations);
      } else if (m == "direct-sdr") {
        const DirectResult& d = ensure_direct();
        r.wall_ms = direct_ms;
        fill_qos(r, d.w, ch, gamma, cfg.sigma2, d.report.iterations);
      } else if (m == "direct-sca") {
        const DirectResult& d = ensure_direct();
        const auto start = Clock::now();
        const DirectResult s = direct_sca_qos(ch, gamma, cfg.sigma2, d.w, spec.direct);
        r.wall_ms = direct_ms + ms_since(start);
        fill_qos(r, s.w, ch, gamma, cfg.sigma2, s.report.iterations);
      } else if (m == "lower-bound") {
        const DirectResult& d = ensure_direct();
        r.wall_ms = direct_ms;
        r.objective_db = r.power_db = db(d.lower_bound / cfg.sigma2);
        r.feasible = true;
        r.iters = d.report.iterations;
      } else {
        throw Error(ErrorCode::InvalidArgument, "unknown QoS method '" + m + "'");
      }
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<BenchRow> run_mmf_instance(const SystemConfig& cfg, const std::vector<std::string>& methods,
                                       const SweepSpec& spec, const std::string& param_name, double param_value,
                                       int trial) {
  const std::uint64_t seed = instance_seed(spec.seed, trial);
  const ChannelSet ch = gen_channels(cfg, seed);
  std::vector<BenchRow> rows;
  for (const auto& m : methods) {
    BenchRow r = blank_row(m, param_name, param_value, trial, seed);
    try {
      const auto start = Clock::now();
      switch (parse_mmf_method(m)) {
        case MmfMethod::QosSdr:
        case MmfMethod::QosSca: {
          const QosMethod qm = parse_mmf_method(m) == MmfMethod::QosSdr ? QosMethod::OptSdr : QosMethod::OptSca;
          const MmfResult res = solve_mmf_bisection(ch, cfg, qm, spec.mmf);
          r.wall_ms = ms_since(start);
          fill_mmf(r, res.w, ch, cfg, res.report.iterations);
          break;
        }
        case MmfMethod::AsymSca: {
          const MmfResult res = asym_mmf_sca(ch, cfg, spec.mmf);
          r.wall_ms = ms_since(start);
          fill_mmf(r, res.w, ch, cfg, res.report.iterations);
          break;
        }
        case MmfMethod::CfAsym: {
          const BeamformerSet w = cf_asym_mmf(ch, cfg);
          r.wall_ms = ms_since(start);
          fill_mmf(r, w, ch, cfg, 0);
          break;
        }
        case MmfMethod::UpperBound: {
          const double t = mmf_upper_bound(ch, cfg, spec.mmf.tol_t);
          r.wall_ms = ms_since(start);
          r.objective_db = db(t);
          r.power_db = db(cfg.P / cfg.sigma2);
          r.feasible = true;
          break;
        }
      }
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<BenchRow> run_qos_sweep(const SweepSpec& spec) {
  return run_sweep(spec, qos_bench_methods(), &run_qos_instance);
}

std::vector<BenchRow> run_mmf_sweep(const SweepSpec& spec) {
  return run_sweep(spec, mmf_bench_methods(), &run_mmf_instance);
}

std::string csv_header() {
  return "method,param_name,param_value,trial,seed,objective_db,power_db,min_sinr_db,feasible,iters,wall_ms";
}

std::string to_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  out << csv_header() << '\n';
  for (const auto& r : rows) {
    out << r.method << ',' << r.param_name << ',' << fmt(r.param_value) << ',' << r.trial << ',' << r.seed << ','
        << fmt(r.objective_db) << ',' << fmt(r.power_db) << ',' << fmt(r.min_sinr_db) << ',' << (r.feasible ? 1 : 0)
        << ',' << r.iters << ',' << fmt(r.wall_ms) << '\n';
  }
  return out.str();
}

std::vector<SummaryRow> summarize(const std::vector<BenchRow>& rows) {
  std::vector<SummaryRow> out;
  std::map<std::pair<std::string, double>, std::size_t> index;
  std::vector<std::vector<double>> values;
  for (const auto& r : rows) {
    const auto key = std::make_pair(r.method, r.param_value);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, out.size()).first;
      out.push_back(SummaryRow{r.method, r.param_value});
      values.emplace_back();
    }
    SummaryRow& s = out[it->second];
    ++s.count;
    if (!r.error.empty()) continue;
    ++s.ok;
    s.mean_wall_ms += r.wall_ms;
    values[it->second].push_back(r.objective_db);
  }
  for (std::size_t c = 0; c < out.size(); ++c) {
    SummaryRow& s = out[c];
    const auto& v = values[c];
    if (v.empty()) {
      s.mean_db = s.stderr_db = kNan;
      continue;
    }
    const double n = static_cast<double>(v.size());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    s.mean_db = mean;
    s.stderr_db = v.size() > 1 ? std::sqrt(var / (n - 1.0) / n) : 0.0;
    s.mean_wall_ms /= n;
  }
  return out;
}

std::string format_summary(const std::vector<SummaryRow>& summary) {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-12s %10s %10s %9s %11s %6s\n", "method", "param", "mean_db", "stderr", "wall_ms",
                "ok");
  out << buf;
  for (const auto& s : summary) {
    std::snprintf(buf, sizeof buf, "%-12s %10g %10.4f %9.4f %11.2f %3d/%-3d\n", s.method.c_str(), s.param_value,
                  s.mean_db, s.stderr_db, s.mean_wall_ms, s.ok, s.count);
    out << buf;
  }
  return out.str();
}

}  // namespace mcbf
