// SPDX-License-Identifier: Apache-2.0
//
// Reduced weight problem: with G_i = R^{-1}(lambda) H_i the beamformer is
// w_i = G_i a_i and the QoS problem becomes a problem over sum_i K_i complex
// weights. With basis reduction H_i a_i = U_i b_i and the variable is b_i.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mcbf/lambda.hpp"
#include "mcbf/multicast.hpp"
#include "mcbf/qos.hpp"

namespace mcbf {

struct ReducedProblem {
  MulticastProblem problem;  // over the reduced variables
  std::vector<CMat> gmat;    // N x d_i: R^{-1} H_i, or R^{-1} U_i with basis reduction
  std::vector<CMat> to_a;    // K_i x d_i map from reduced variable to a_i
  std::vector<CMat> from_a;  // d_i x K_i map from a_i to the reduced variable
  bool basis_reduced = false;

  std::vector<CVec> weights_to_a(const std::vector<CVec>& b) const;
  std::vector<CVec> a_to_weights(const std::vector<CVec>& a) const;
  BeamformerSet beamformers(const std::vector<CVec>& b) const;  // w_i = gmat_i b_i
};

/// Default: basis reduction on when N exceeds every K_i.
ReducedProblem build_reduced_problem(const ChannelSet& ch, const RVec& lambda, const RVec& gamma, double sigma2,
                                     std::optional<bool> use_basis_reduction = std::nullopt);

struct WeightSolution {
  std::vector<CVec> b;  // reduced variables
  std::vector<CVec> a;  // group weights
  double lower_bound = 0.0;
  bool rank_one = false;
  SolverReport report;
};

inline constexpr int kDefaultRandomizations = 300;

/// SDR over the reduced problem followed by randomization and power scaling.
WeightSolution solve_weights_sdr(const ReducedProblem& rp, int n_rand = kDefaultRandomizations,
                                 std::uint64_t seed = 1);

/// SCA from feasible reduced weights v0 (e.g. the SDR output).
WeightSolution solve_weights_sca(const ReducedProblem& rp, const std::vector<CVec>& v0, double tol = 1e-6);

enum class QosMethod { OptSdr, OptSca, AsymSca };

const char* to_string(QosMethod method) noexcept;
QosMethod parse_qos_method(const std::string& name);

struct QosOptions {
  int n_rand = kDefaultRandomizations;
  std::uint64_t seed = 1;  // randomization seed
  std::optional<bool> basis_reduction;
  double sca_tol = 1e-6;
  LambdaOptions lambda{};
};

struct QosResult {
  StructuredSolution solution;
  double power = 0.0;
  double lower_bound = 0.0;  // SDR optimum of the reduced problem
  SolverReport report;       // iterations: SCA iterations (or SDP iterations for OptSdr)
  double lambda_ms = 0.0;
  double weights_ms = 0.0;
};

/// lambda (fixed point, or the asymptotic closed form for AsymSca), reduced
/// problem, weights, assembly. Throws Error(Infeasible) when the SDR stage
/// proves the targets unreachable under this structure.
QosResult solve_qos(const ChannelSet& ch, const RVec& gamma, double sigma2, QosMethod method,
                    const QosOptions& options = {});
QosResult solve_qos(const ChannelSet& ch, const SystemConfig& cfg, QosMethod method, const QosOptions& options = {});

}  // namespace mcbf
