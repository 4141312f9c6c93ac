// SPDX-License-Identifier: Apache-2.0
//
// Beamformer metrics and the closed-form machinery around
//   w_i = R(lambda)^{-1} H_i a_i,  R(lambda) = I + sum lambda_ik gamma_ik h_ik h_ik^H.
// Per-user quantities (lambda, gamma, SINR) are flat vectors in group-major
// user order, see SystemConfig::offset.
#pragma once

#include <vector>

#include "mcbf/linalg.hpp"
#include "mcbf/report.hpp"
#include "mcbf/scenario.hpp"

namespace mcbf {

using BeamformerSet = std::vector<CVec>;

inline constexpr double kSinrSlack = 1e-6;

struct GroupWeights {
  std::vector<CVec> a;
  std::vector<CVec> alpha;  // optional
  std::vector<CVec> delta;  // optional, delta_ik = h_ik^H w_i
};

struct StructuredSolution {
  RVec lambda;
  GroupWeights weights;
  BeamformerSet w;
  bool consistent = false;  // a_ik = lambda_ik delta_ik (1 + gamma_ik) verified
};

RVec sinr(const BeamformerSet& w, const ChannelSet& ch, double sigma2);
double total_power(const BeamformerSet& w);
/// min_ik SINR_ik / gamma_ik
double min_sinr_ratio(const BeamformerSet& w, const ChannelSet& ch, const RVec& gamma, double sigma2);
/// SINR_ik >= gamma_ik (1 - slack) for every user.
bool meets_targets(const BeamformerSet& w, const ChannelSet& ch, const RVec& gamma, double sigma2,
                   double slack = kSinrSlack);

CMat build_R(const RVec& lambda, const ChannelSet& ch, const RVec& gamma);
CMat build_R_minus(const RVec& lambda, const ChannelSet& ch, const RVec& gamma, int group);

/// w_i = R^{-1} H_i a_i
BeamformerSet assemble_beamformer(const RVec& lambda, const std::vector<CVec>& a, const ChannelSet& ch,
                                  const RVec& gamma);
/// w_i = R_{i-}^{-1} H_i alpha_i
BeamformerSet assemble_beamformer_alt(const RVec& lambda, const std::vector<CVec>& alpha,
                                      const ChannelSet& ch, const RVec& gamma);
/// Weights that make the two assembly forms coincide for arbitrary a:
/// alpha_i = a_i - lambda_i gamma_i delta_i with delta_i = H_i^H R^{-1} H_i a_i.
/// Equals a_i / (1 + gamma_i) exactly when a_i = lambda_i delta_i (1 + gamma_i).
std::vector<CVec> alpha_from_a(const RVec& lambda, const std::vector<CVec>& a, const ChannelSet& ch,
                               const RVec& gamma);
/// delta_ik = h_ik^H w_i
std::vector<CVec> group_delta(const BeamformerSet& w, const ChannelSet& ch);
/// max_ik |a_ik - lambda_ik delta_ik (1 + gamma_ik)| relative to max|a|.
double weight_relation_residual(const RVec& lambda, const std::vector<CVec>& a, const BeamformerSet& w,
                                const ChannelSet& ch, const RVec& gamma);

/// Rotates each a_i so that its first nonzero entry is real positive.
void normalize_phase(std::vector<CVec>& a);

double power_identity(const RVec& lambda, const RVec& gamma, double sigma2);

struct UnicastSolution {
  BeamformerSet w;
  RVec lambda;
  RVec power;  // per-user downlink powers
  SolverReport report;
};

/// Classical downlink unicast solution (K_i = 1) through uplink-downlink
/// duality. Throws Error(Infeasible) if the dual fixed point diverges or the
/// downlink power system has no positive solution.
UnicastSolution unicast_reference(const ChannelSet& ch, const RVec& gamma, double sigma2,
                                  double tol = 1e-12, int max_iter = 5000);

/// ||(I - Pi_i) w_i|| / ||w_i||, Pi_i the projector onto range(R^{-1} H_i).
RVec structure_residual(const BeamformerSet& w, const RVec& lambda, const ChannelSet& ch, const RVec& gamma);

/// Sine of the angle between w_i and R_{i-}^{-1} sum_k lambda_ik delta_ik h_ik.
RVec duality_check(const BeamformerSet& w, const RVec& lambda, const ChannelSet& ch, const RVec& gamma);

/// Sine of the angle between two vectors; 0 when collinear.
double collinearity_sine(const CVec& x, const CVec& y);

}  // namespace mcbf
