// SPDX-License-Identifier: Apache-2.0
//
// Max-min-fair beamforming: maximize min_ik SINR_ik / gamma_ik subject to
// total power P, solved through its inverse QoS problem.
#pragma once

#include <string>

#include "mcbf/direct.hpp"
#include "mcbf/weights.hpp"

namespace mcbf {

enum class MmfMethod { QosSdr, QosSca, AsymSca, CfAsym, UpperBound };

const char* to_string(MmfMethod method) noexcept;
MmfMethod parse_mmf_method(const std::string& name);

struct MmfOptions {
  double tol_t = 1e-3;  // stop when |P_o(t gamma) - P| <= tol_t P
  int max_steps = 80;
  QosOptions qos{};
};

struct MmfResult {
  BeamformerSet w;     // scaled to total power P
  double t_star = 0.0; // min_ik SINR_ik / gamma_ik of w
  double power = 0.0;
  double t_qos = 0.0;  // last feasible bisection point
  RVec lambda;         // multipliers of the QoS solve at t_qos
  std::vector<CVec> delta;  // h_ik^H w_i of the QoS solution at t_qos
  SolverReport report;      // trajectory: bisection points
};

/// Bisection over t on P_o(t gamma); QoS failures count as power above P.
MmfResult solve_mmf_bisection(const ChannelSet& ch, const SystemConfig& cfg, QosMethod qos_method,
                              const MmfOptions& options = {});

/// P / (sigma2 lambda^T gamma)
double mmf_optimal_value(const RVec& lambda_qos, const RVec& gamma, double sigma2, double P);

/// w_i = R~^{-1} H_i a~_i with R~ = I + (P/sigma2) sum (lambda gamma / lambda^T gamma) h h^H
/// and a~_ik = lambda_ik delta_ik (1 + P gamma_ik / (sigma2 lambda^T gamma)).
BeamformerSet assemble_mmf(const RVec& lambda_qos, const std::vector<CVec>& delta, const ChannelSet& ch,
                           const SystemConfig& cfg);

/// 1 / mean(1 / beta)
double harmonic_mean(const RVec& beta);

/// R~inf = I + (P / (sigma2 K_tot)) beta_h sum g g^H. Throws UnequalTargets.
CMat asymptotic_mmf_R(const ChannelSet& ch, const SystemConfig& cfg);

/// Weights optimized against the fixed R~inf with bisection over t.
MmfResult asym_mmf_sca(const ChannelSet& ch, const SystemConfig& cfg, const MmfOptions& options = {});

/// Closed form w_i = c_i R~inf^{-1} H_i q_i, q_ik = 1 / beta_ik, group power
/// K_i beta_h P / (K_tot beta_h,i).
BeamformerSet cf_asym_mmf(const ChannelSet& ch, const SystemConfig& cfg);

/// Upper end of the bisection bracket on the SDR of the MMF problem, solved
/// in the channel span.
double mmf_upper_bound(const ChannelSet& ch, const SystemConfig& cfg, double tol_t = 1e-3);

}  // namespace mcbf
