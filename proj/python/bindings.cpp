// SPDX-License-Identifier: Apache-2.0
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mcbf/bench.hpp"
#include "mcbf/error.hpp"
#include "mcbf/lambda.hpp"
#include "mcbf/mmf.hpp"
#include "mcbf/qos.hpp"
#include "mcbf/scenario.hpp"
#include "mcbf/validate.hpp"
#include "mcbf/weights.hpp"

namespace py = pybind11;
using namespace mcbf;

namespace {

py::dict qos_dict(const QosResult& q) {
  py::dict d;
  d["w"] = q.solution.w;
  d["lambda"] = q.solution.lambda;
  d["a"] = q.solution.weights.a;
  d["power"] = q.power;
  d["lower_bound"] = q.lower_bound;
  d["iterations"] = q.report.iterations;
  d["status"] = to_string(q.report.status);
  return d;
}

py::dict mmf_dict(const MmfResult& r) {
  py::dict d;
  d["w"] = r.w;
  d["t_star"] = r.t_star;
  d["t_qos"] = r.t_qos;
  d["power"] = r.power;
  d["lambda"] = r.lambda;
  d["bisection_points"] = r.report.trajectory;
  return d;
}

SweepSpec make_spec(const SystemConfig& base, const std::vector<std::string>& methods, const std::string& param,
                    const std::vector<double>& values, int trials, std::uint64_t seed, int workers, bool timing) {
  SweepSpec spec;
  spec.base = base;
  spec.methods = methods;
  spec.param_name = param;
  spec.values = values;
  spec.trials = trials;
  spec.seed = seed;
  spec.workers = workers;
  spec.timing = timing;
  return spec;
}

}  // namespace

PYBIND11_MODULE(_mcbf, m) {
  m.doc() = "Multi-group multicast beamforming";

  static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  py::enum_<ChannelModel>(m, "ChannelModel")
      .value("Normalized", ChannelModel::Normalized)
      .value("Pathloss", ChannelModel::Pathloss);

  py::class_<SystemConfig>(m, "SystemConfig")
      .def(py::init<>())
      .def_static("uniform", &SystemConfig::uniform, py::arg("G"), py::arg("K"), py::arg("N"),
                  py::arg("gamma_db") = 10.0)
      .def_readwrite("G", &SystemConfig::G)
      .def_readwrite("K", &SystemConfig::K)
      .def_readwrite("N", &SystemConfig::N)
      .def_readwrite("gamma_db", &SystemConfig::gamma_db)
      .def_readwrite("sigma2", &SystemConfig::sigma2)
      .def_readwrite("P", &SystemConfig::P)
      .def_readwrite("channel_model", &SystemConfig::channel_model)
      .def_readwrite("seed", &SystemConfig::seed)
      .def_property_readonly("k_tot", &SystemConfig::k_tot)
      .def("gamma", &SystemConfig::gamma)
      .def("validate", &SystemConfig::validate)
      .def("to_json", [](const SystemConfig& c) { return scenario_to_json(Scenario{c, std::nullopt}); })
      .def_static("from_json", [](const std::string& s) { return scenario_from_json(s).config; });

  py::class_<ChannelSet>(m, "ChannelSet")
      .def(py::init<>())
      .def_readwrite("H", &ChannelSet::H)
      .def_readwrite("beta", &ChannelSet::beta)
      .def_property_readonly("groups", &ChannelSet::groups)
      .def_property_readonly("antennas", &ChannelSet::antennas)
      .def("stacked", &ChannelSet::stacked);

  m.def("gen_channels", &gen_channels, py::arg("cfg"), py::arg("seed"));

  m.def("sinr", &sinr, py::arg("w"), py::arg("channels"), py::arg("sigma2"));
  m.def("total_power", &total_power, py::arg("w"));
  m.def("min_sinr_ratio", &min_sinr_ratio, py::arg("w"), py::arg("channels"), py::arg("gamma"), py::arg("sigma2"));
  m.def("build_R", &build_R, py::arg("lam"), py::arg("channels"), py::arg("gamma"));
  m.def("assemble_beamformer", &assemble_beamformer, py::arg("lam"), py::arg("a"), py::arg("channels"),
        py::arg("gamma"));

  m.def(
      "fixed_point_lambda",
      [](const ChannelSet& ch, const RVec& gamma, double tol, int max_iter) {
        LambdaOptions o;
        o.tol = tol;
        o.max_iter = max_iter;
        auto r = fixed_point_lambda(ch, gamma, o);
        return py::make_tuple(r.lambda, r.report.residual, r.report.iterations);
      },
      py::arg("channels"), py::arg("gamma"), py::arg("tol") = 1e-9, py::arg("max_iter") = 500);
  m.def("asymptotic_lambda", &asymptotic_lambda, py::arg("beta"), py::arg("gamma"), py::arg("N"));

  m.def(
      "unicast_reference",
      [](const ChannelSet& ch, const RVec& gamma, double sigma2) {
        auto u = unicast_reference(ch, gamma, sigma2);
        py::dict d;
        d["w"] = u.w;
        d["lambda"] = u.lambda;
        d["power"] = total_power(u.w);
        return d;
      },
      py::arg("channels"), py::arg("gamma"), py::arg("sigma2"));

  m.def(
      "solve_qos",
      [](const ChannelSet& ch, const SystemConfig& cfg, const std::string& method, int n_rand, std::uint64_t seed) {
        QosOptions o;
        o.n_rand = n_rand;
        o.seed = seed;
        return qos_dict(solve_qos(ch, cfg, parse_qos_method(method), o));
      },
      py::arg("channels"), py::arg("cfg"), py::arg("method") = "opt-sca", py::arg("n_rand") = kDefaultRandomizations,
      py::arg("seed") = 1);

  m.def(
      "solve_mmf",
      [](const ChannelSet& ch, const SystemConfig& cfg, const std::string& method, double tol_t) {
        MmfOptions o;
        o.tol_t = tol_t;
        switch (parse_mmf_method(method)) {
          case MmfMethod::QosSdr: return mmf_dict(solve_mmf_bisection(ch, cfg, QosMethod::OptSdr, o));
          case MmfMethod::QosSca: return mmf_dict(solve_mmf_bisection(ch, cfg, QosMethod::OptSca, o));
          case MmfMethod::AsymSca: return mmf_dict(asym_mmf_sca(ch, cfg, o));
          case MmfMethod::CfAsym: {
            py::dict d;
            const auto w = cf_asym_mmf(ch, cfg);
            d["w"] = w;
            d["t_star"] = min_sinr_ratio(w, ch, cfg.gamma(), cfg.sigma2);
            d["power"] = total_power(w);
            return d;
          }
          case MmfMethod::UpperBound: {
            py::dict d;
            d["t_star"] = mmf_upper_bound(ch, cfg, tol_t);
            return d;
          }
        }
        throw Error(ErrorCode::InvalidArgument, "unknown method");
      },
      py::arg("channels"), py::arg("cfg"), py::arg("method") = "qos2mmf-sca", py::arg("tol_t") = 1e-3);

  m.def(
      "bench",
      [](const std::string& kind, const SystemConfig& base, const std::vector<std::string>& methods,
         const std::string& param, const std::vector<double>& values, int trials, std::uint64_t seed, int workers,
         bool timing) {
        const SweepSpec spec = make_spec(base, methods, param, values, trials, seed, workers, timing);
        if (kind == "qos") return to_csv(run_qos_sweep(spec));
        if (kind == "mmf") return to_csv(run_mmf_sweep(spec));
        throw Error(ErrorCode::InvalidArgument, "kind must be 'qos' or 'mmf'");
      },
      py::arg("kind"), py::arg("base"), py::arg("methods") = std::vector<std::string>{}, py::arg("param") = "N",
      py::arg("values") = std::vector<double>{}, py::arg("trials") = kDefaultTrials, py::arg("seed") = 1,
      py::arg("workers") = 0, py::arg("timing") = true);

  m.def(
      "validate",
      [](std::uint64_t seed, const std::vector<std::string>& only) {
        ValidateOptions o;
        o.seed = seed;
        o.only = only;
        const auto rep = validate(o);
        py::dict d;
        for (const auto& c : rep.checks) d[py::str(c.name)] = py::make_tuple(c.pass, c.value, c.limit);
        return d;
      },
      py::arg("seed") = 1, py::arg("only") = std::vector<std::string>{});
}
