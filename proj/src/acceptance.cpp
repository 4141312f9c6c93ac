// SPDX-License-Identifier: Apache-2.0
#include "mcbf/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include "mcbf/error.hpp"

namespace mcbf {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double db(double x) { return 10.0 * std::log10(x); }

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// (method, N) -> rows by trial
class RowIndex {
 public:
  void add(const std::vector<BenchRow>& rows) {
    store_.push_back(rows);
    cells_.clear();
    for (const auto& block : store_) {
      for (const auto& r : block) cells_[{r.method, r.param_value}].push_back(&r);
    }
  }
  const std::vector<const BenchRow*>& cell(const std::string& method, double n) const {
    static const std::vector<const BenchRow*> empty;
    auto it = cells_.find({method, n});
    return it == cells_.end() ? empty : it->second;
  }
  double wall_seconds(const std::vector<std::string>& methods, const std::vector<double>& values) const {
    double ms = 0.0;
    for (const auto& m : methods) {
      for (double v : values) {
        for (const auto* r : cell(m, v)) ms += r->wall_ms;
      }
    }
    return ms / 1000.0;
  }

 private:
  std::vector<std::vector<BenchRow>> store_;
  std::map<std::pair<std::string, double>, std::vector<const BenchRow*>> cells_;
};

// Mean of objective_db over trials where every listed method produced a value.
std::vector<double> paired_means(const RowIndex& index, const std::vector<std::string>& methods, double n,
                                 int* used) {
  std::vector<double> sums(methods.size(), 0.0);
  const std::size_t trials = index.cell(methods.front(), n).size();
  *used = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    bool ok = true;
    for (const auto& m : methods) {
      const auto& c = index.cell(m, n);
      ok = ok && t < c.size() && c[t]->error.empty();
    }
    if (!ok) continue;
    ++*used;
    for (std::size_t k = 0; k < methods.size(); ++k) sums[k] += index.cell(methods[k], n)[t]->objective_db;
  }
  for (auto& s : sums) s = *used ? s / *used : std::numeric_limits<double>::quiet_NaN();
  return sums;
}

const char* const kTitles[] = {"", "feasibility suite", "unicast oracle", "power identity at N = 500",
                               "asymptotic multipliers", "method ordering", "structured vs direct",
                               "weight stage dimension independence", "MMF inversion round trip", "MMF quality",
                               "solver unit oracles", "property suites"};

class Runner {
 public:
  explicit Runner(const AcceptanceOptions& o) : opt_(o) {}

  CriterionResult run(int id) {
    const auto start = Clock::now();
    CriterionResult r;
    r.id = id;
    r.title = id >= 1 && id <= 11 ? kTitles[id] : "unknown";
    switch (id) {
      case 1: feasibility(r); break;
      case 2: unicast(r); break;
      case 3: power_identity(r); break;
      case 4: prop3(r); break;
      case 5: ordering(r); break;
      case 6: structured_vs_direct(r); break;
      case 7: weight_timing(r); break;
      case 8: round_trip(r); break;
      case 9: mmf_quality(r); break;
      case 11: properties(r); break;
      default: throw Error(ErrorCode::InvalidArgument, "unknown acceptance criterion");
    }
    r.pass = !r.parts.empty() && std::all_of(r.parts.begin(), r.parts.end(), [](const CheckResult& c) { return c.pass; });
    r.seconds = seconds_since(start);
    return r;
  }

 private:
  SweepSpec spec(const SystemConfig& base, std::vector<std::string> methods, std::vector<double> values,
                 int trials) const {
    SweepSpec s;
    s.base = base;
    s.methods = std::move(methods);
    s.values = std::move(values);
    s.trials = trials;
    s.seed = opt_.seed;
    s.workers = opt_.workers;
    s.direct.span_reduction = true;
    return s;
  }

  const RowIndex& qos_rows() {
    if (!qos_ready_) {
      const auto s = spec(SystemConfig::uniform(3, 5, 50), qos_bench_methods(), {16, 32, 50, 100, 200}, opt_.trials);
      qos_.add(run_qos_sweep(s));
      qos_ready_ = true;
    }
    return qos_;
  }

  void feasibility(CriterionResult& r) {
    const RowIndex& q = qos_rows();
    const std::vector<double> ns = {16, 50, 100, 200};
    const std::vector<std::string> qm = {"opt-sdr", "opt-sca", "asym-sca", "direct-sdr", "direct-sca"};
    const double gamma_db = 10.0;
    double shortfall = 0.0;
    int outputs = 0, errors = 0;
    for (const auto& m : qm) {
      for (double n : ns) {
        for (const auto* row : q.cell(m, n)) {
          if (!row->error.empty()) {
            ++errors;
            continue;
          }
          ++outputs;
          shortfall = std::max(shortfall, 1.0 - std::pow(10.0, (row->min_sinr_db - gamma_db) / 10.0));
        }
      }
    }
    const std::vector<std::string> mm = {"qos2mmf-sdr", "qos2mmf-sca", "asym-sca", "cf-asym"};
    SystemConfig base = SystemConfig::uniform(3, 5, 50);
    RowIndex mmf;
    mmf.add(run_mmf_sweep(spec(base, mm, ns, opt_.mmf_feasibility_trials)));
    double excess = -1.0;
    int mmf_outputs = 0, mmf_errors = 0;
    for (const auto& m : mm) {
      for (double n : ns) {
        for (const auto* row : mmf.cell(m, n)) {
          if (!row->error.empty()) {
            ++mmf_errors;
            continue;
          }
          ++mmf_outputs;
          excess = std::max(excess, std::pow(10.0, row->power_db / 10.0) * base.sigma2 / base.P - 1.0);
        }
      }
    }
    const double secs = q.wall_seconds(qm, ns) + mmf.wall_seconds(mm, ns);
    r.parts.push_back(check_at_most("qos SINR shortfall", shortfall, kSinrSlack,
                                    fmt("%.0f outputs, %.0f not produced", outputs, errors)));
    r.parts.push_back(check_at_most("mmf power excess", excess, 1e-8,
                                    fmt("%.0f outputs, %.0f not produced", mmf_outputs, mmf_errors)));
    r.parts.push_back(check_at_most("solve time [s]", secs, 600.0));
  }

  void unicast(CriterionResult& r) {
    const SystemConfig cfg = SystemConfig::uniform(3, 1, 8);
    const RVec gamma = cfg.gamma();
    const std::vector<std::string> methods = {"opt-sdr", "opt-sca", "direct-sdr"};
    const auto rows = run_qos_sweep(spec(cfg, methods, {8}, 50));
    std::map<std::uint64_t, double> reference;
    double identity = 0.0;
    int skipped = 0;
    for (int trial = 0; trial < 50; ++trial) {
      const std::uint64_t seed = instance_seed(opt_.seed, trial);
      const ChannelSet ch = gen_channels(cfg, seed);
      try {
        const UnicastSolution u = unicast_reference(ch, gamma, cfg.sigma2);
        const double p = total_power(u.w);
        reference[seed] = db(p / cfg.sigma2);
        const LambdaResult lam = fixed_point_lambda(ch, gamma);
        identity = std::max(identity, std::abs(mcbf::power_identity(lam.lambda, gamma, cfg.sigma2) - p) / p);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::Infeasible) throw;
        ++skipped;
      }
    }
    double worst = 0.0;
    int failures = 0;
    for (const auto& row : rows) {
      auto it = reference.find(row.seed);
      if (it == reference.end()) continue;
      if (!row.error.empty()) {
        ++failures;
        continue;
      }
      worst = std::max(worst, std::abs(row.power_db - it->second));
    }
    const std::string detail = fmt("%.0f instances, %.0f infeasible skipped, %.0f method failures",
                                   static_cast<double>(reference.size()), skipped, failures);
    r.parts.push_back(check_at_most("power vs unicast [dB]", failures ? std::numeric_limits<double>::infinity() : worst,
                                    1e-3, detail));
    r.parts.push_back(check_at_most("power identity rel", identity, 1e-6));
  }

  void power_identity(CriterionResult& r) {
    const SystemConfig cfg = SystemConfig::uniform(3, 5, 500);
    const RVec gamma = cfg.gamma();
    double sum = 0.0;
    for (int trial = 0; trial < opt_.trials; ++trial) {
      const ChannelSet ch = gen_channels(cfg, instance_seed(opt_.seed, trial));
      const QosResult q = solve_qos(ch, cfg, QosMethod::OptSca);
      sum += std::abs(q.power - mcbf::power_identity(q.solution.lambda, gamma, cfg.sigma2)) / q.power;
    }
    r.parts.push_back(check_at_most("mean |P - s2 l'g| / P", sum / opt_.trials, 0.05));
  }

  void prop3(CriterionResult& r) {
    const SystemConfig cfg = SystemConfig::uniform(3, 5, 500);
    const RVec gamma = cfg.gamma();
    double sum = 0.0;
    for (int trial = 0; trial < opt_.trials; ++trial) {
      const ChannelSet ch = gen_channels(cfg, instance_seed(opt_.seed, trial));
      const RVec lam = fixed_point_lambda(ch, gamma).lambda;
      const RVec beta = ch.beta_flat();
      double worst = 0.0;
      for (int u = 0; u < cfg.k_tot(); ++u) {
        const double others = gamma.sum() - gamma(u);
        worst = std::max(worst, std::abs(lam(u) * beta(u) * (cfg.N - others) - 1.0));
      }
      sum += worst;
    }
    r.parts.push_back(check_at_most("mean max |l b (N - sum g) - 1|", sum / opt_.trials, 0.1));
    const RVec spot = asymptotic_lambda(RVec::Ones(15), RVec::Constant(15, 10.0), 256);
    r.parts.push_back(check_at_most("N = 256 spot vs 1/116", ((spot * 116.0).array() - 1.0).abs().maxCoeff(), 1e-15));
  }

  void ordering(CriterionResult& r) {
    const RowIndex& q = qos_rows();
    const std::vector<std::string> methods = {"lower-bound", "opt-sca", "opt-sdr", "direct-sdr"};
    for (double n : {50.0, 100.0}) {
      int used = 0;
      const auto m = paired_means(q, methods, n, &used);
      const double violation = std::max({m[0] - m[1], m[1] - m[2], m[2] - m[3]});
      r.parts.push_back(check_at_most(fmt("N=%.0f order violation [dB]", n), violation, 0.0,
                                      fmt("lb %.3f sca %.3f sdr %.3f", m[0], m[1], m[2]) +
                                          fmt(" direct %.3f, %.0f trials", m[3], used)));
      r.parts.push_back(check_at_most(fmt("N=%.0f sdr gap [dB]", n), m[2] - m[0], 0.6));
    }
    r.parts.push_back(check_at_most("solve time [s]", q.wall_seconds(methods, {50, 100}), 900.0));
  }

  void structured_vs_direct(CriterionResult& r) {
    const RowIndex& q = qos_rows();
    for (double n : {16.0, 32.0}) {
      int used = 0;
      const auto m = paired_means(q, {"opt-sca", "direct-sca"}, n, &used);
      r.parts.push_back(check_at_most(fmt("N=%.0f |sca - direct sca| [dB]", n), std::abs(m[0] - m[1]), 0.3,
                                      fmt("%.3f vs %.3f over %.0f trials", m[0], m[1], used)));
    }
  }

  void weight_timing(CriterionResult& r) {
    std::vector<double> med;
    for (int n : {50, 500}) {
      const SystemConfig cfg = SystemConfig::uniform(3, 5, n);
      std::vector<double> times;
      for (int trial = 0; trial < 5; ++trial) {
        const ChannelSet ch = gen_channels(cfg, instance_seed(opt_.seed, trial));
        const RVec lam = fixed_point_lambda(ch, cfg.gamma()).lambda;
        const ReducedProblem rp = build_reduced_problem(ch, lam, cfg.gamma(), cfg.sigma2);
        const WeightSolution sdr = solve_weights_sdr(rp);
        const auto start = Clock::now();
        solve_weights_sca(rp, sdr.b);
        times.push_back(seconds_since(start) * 1000.0);
      }
      med.push_back(median(times));
    }
    r.parts.push_back(check_at_most("time ratio N=500 / N=50", med[1] / med[0], 2.0,
                                    fmt("median %.1f ms vs %.1f ms", med[1], med[0])));
  }

  void round_trip(CriterionResult& r) {
    const SystemConfig cfg = SystemConfig::uniform(3, 5, 32);
    double worst = 0.0;
    for (int trial = 0; trial < opt_.trials; ++trial) {
      const ChannelSet ch = gen_channels(cfg, instance_seed(opt_.seed, trial));
      const MmfResult m = solve_mmf_bisection(ch, cfg, QosMethod::OptSca);
      const QosResult q = solve_qos(ch, RVec(m.t_star * cfg.gamma()), cfg.sigma2, QosMethod::OptSca);
      worst = std::max(worst, std::abs(q.power / cfg.P - 1.0));
    }
    r.parts.push_back(check_at_most("max |P_o(t* g) / P - 1|", worst, 0.01));
  }

  void mmf_quality(CriterionResult& r) {
    const SystemConfig base = SystemConfig::uniform(3, 5, 100);
    RowIndex rows;
    rows.add(run_mmf_sweep(spec(base, {"qos2mmf-sca", "upper-bound"}, {100, 300}, opt_.trials)));
    rows.add(run_mmf_sweep(spec(base, {"cf-asym", "upper-bound"}, {500}, opt_.trials)));
    for (double n : {100.0, 300.0}) {
      int used = 0;
      const auto m = paired_means(rows, {"upper-bound", "qos2mmf-sca"}, n, &used);
      r.parts.push_back(check_at_most(fmt("N=%.0f bound - qos2mmf-sca [dB]", n), m[0] - m[1], 0.5,
                                      fmt("%.0f trials", used)));
    }
    int used = 0;
    const auto m = paired_means(rows, {"upper-bound", "cf-asym"}, 500, &used);
    r.parts.push_back(check_at_most("N=500 bound - cf-asym [dB]", m[0] - m[1], 1.5, fmt("%.0f trials", used)));
  }

  void properties(CriterionResult& r) {
    ValidateOptions vo;
    vo.seed = opt_.seed;
    r.parts = validate(vo).checks;
  }

  AcceptanceOptions opt_;
  RowIndex qos_;
  bool qos_ready_ = false;
};

}  // namespace

std::vector<int> acceptance_criteria() { return {1, 2, 3, 4, 5, 6, 7, 8, 9, 11}; }

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options) {
  const std::vector<int> ids = options.criteria.empty() ? acceptance_criteria() : options.criteria;
  Runner runner(options);
  std::vector<CriterionResult> out;
  for (int id : ids) {
    try {
      out.push_back(runner.run(id));
    } catch (const std::exception& e) {
      CriterionResult r;
      r.id = id;
      r.title = id >= 1 && id <= 11 ? kTitles[id] : "unknown";
      r.parts.push_back(CheckResult{"error", false, std::numeric_limits<double>::quiet_NaN(), 0.0, true, e.what()});
      out.push_back(std::move(r));
    }
  }
  return out;
}

std::string format_criterion(const CriterionResult& r) {
  std::ostringstream out;
  char buf[128];
  std::snprintf(buf, sizeof buf, "criterion %2d %s  %-36s (%.0f s)", r.id, r.pass ? "PASS" : "FAIL", r.title.c_str(),
                r.seconds);
  out << buf;
  int hidden = 0;
  for (const auto& c : r.parts) {
    if (r.parts.size() > 8 && c.pass) {
      ++hidden;
      continue;
    }
    std::snprintf(buf, sizeof buf, " | %s%s: %.4g %s %.3g", c.pass ? "" : "FAIL ", c.name.c_str(), c.value,
                  c.upper ? "<=" : ">=", c.limit);
    out << buf;
    if (!c.detail.empty()) out << " (" << c.detail << ')';
  }
  if (hidden) out << " | " << hidden << " further checks pass";
  return out.str();
}

}  // namespace mcbf
