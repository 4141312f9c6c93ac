// SPDX-License-Identifier: Apache-2.0
//
// Generic multi-group multicast QoS problem in "weight" form:
//   min  sum_i x_i^H Q_i x_i
//   s.t. |x_i^H f_{i,u}|^2 / (sum_{j != i} |x_j^H f_{j,u}|^2 + sigma2) >= gamma_u,  u in group i.
// The reduced weight problem uses x_i = b_i, Q_i = G_i^H G_i, f_{j,u} = G_j^H h_u;
// the direct problem uses x_i = w_i, Q_i = I, f_{j,u} = h_u (optionally in the
// orthonormal basis of the channel span).
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mcbf/linalg.hpp"
#include "mcbf/qcqp.hpp"
#include "mcbf/report.hpp"
#include "mcbf/sdp.hpp"

namespace mcbf {

struct MulticastProblem {
  std::vector<CMat> gram;   // Q_i, d_i x d_i
  std::vector<CMat> cross;  // F_j, d_j x K_tot, column u is f_{j,u}
  std::vector<int> users;   // K_i
  RVec gamma;
  double sigma2 = 1.0;

  int groups() const { return static_cast<int>(gram.size()); }
  int k_tot() const { return static_cast<int>(gamma.size()); }
  int dim(int group) const { return static_cast<int>(gram[static_cast<std::size_t>(group)].rows()); }
  int total_dim() const;
  int group_of(int user) const;
  double objective(const std::vector<CVec>& x) const;
  RVec sinr(const std::vector<CVec>& x) const;
  /// Largest relative target violation max_u (1 - SINR_u / gamma_u), clipped at 0.
  double violation(const std::vector<CVec>& x) const;
  void validate() const;
};

struct Relaxation {
  std::vector<CMat> x;  // optimal PSD blocks
  double lower_bound = 0.0;
  SolverReport report;
};

/// One PSD block per group; user u in group i gives
///   f_{i,u}^H X_i f_{i,u} / gamma_u - sum_{j != i} f_{j,u}^H X_j f_{j,u} >= sigma2.
SdpProblem relaxation_sdp(const MulticastProblem& problem);

/// SDP relaxation over X_i = x_i x_i^H without the rank constraint. Throws
/// Error(Infeasible) on an infeasibility certificate and Error(NumericalFailure
/// / IterLimit) when the interior-point method stops early.
Relaxation solve_relaxation(const MulticastProblem& problem, const SdpOptions& options = {});

/// Componentwise-minimal group powers p making directions sqrt(p_i) x_i meet
/// every target, or nullopt when no such powers exist.
std::optional<RVec> min_group_powers(const MulticastProblem& problem, const std::vector<CVec>& directions);

struct Extraction {
  std::vector<CVec> x;
  double objective = 0.0;
  bool rank_one = false;
  int feasible_candidates = 0;
};

inline constexpr double kRankOneRatio = 1e-7;

/// Principal-eigenvector candidate plus n_rand Gaussian draws x_i ~ CN(0, X_i),
/// each rescaled by min_group_powers; the cheapest feasible one wins. Draws are
/// skipped when every block is numerically rank one. Throws
/// Error(RandomizationFailed) when no candidate is feasible.
Extraction randomize_and_scale(const MulticastProblem& problem, const std::vector<CMat>& x, int n_rand,
                               std::uint64_t seed);

enum class ScaForm {
  OwnSignal,  // linearize the own-group signal term, interference kept exact
  Weight      // (1/gamma + 1)|x_i^H f|^2 linearized, all |x_j^H f|^2 kept exact
};

struct ScaOptions {
  ScaForm form = ScaForm::Weight;
  double tol = 1e-6;  // relative objective decrease
  int max_iter = 100;
  QcqpOptions qcqp{};
};

struct ScaResult {
  std::vector<CVec> x;
  SolverReport report;  // trajectory starts with the objective of x0
};

/// Successive convex approximation from a feasible start. Throws
/// Error(InfeasibleStart) if x0 misses a target by more than the SINR slack.
ScaResult solve_sca(const MulticastProblem& problem, const std::vector<CVec>& x0, const ScaOptions& options = {});

}  // namespace mcbf
