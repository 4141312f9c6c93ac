// SPDX-License-Identifier: Apache-2.0
//
// Full-dimension baselines that optimize w directly: SDR over N x N blocks
// and SCA on the original SINR constraints.
#pragma once

#include <cstdint>

#include "mcbf/multicast.hpp"
#include "mcbf/qos.hpp"

namespace mcbf {

struct DirectOptions {
  int max_antennas = 64;        // larger N is refused unless span_reduction is set
  bool span_reduction = false;  // optimize in the orthonormal basis of all channels (exact)
  int n_rand = 300;
  std::uint64_t seed = 1;
  double sca_tol = 1e-6;
};

struct DirectResult {
  BeamformerSet w;
  double power = 0.0;
  double lower_bound = 0.0;  // relaxation optimum (SDR only)
  SolverReport report;
};

/// The QoS problem over w; with span reduction w_i = U x_i where U spans all channels.
MulticastProblem direct_problem(const ChannelSet& ch, const RVec& gamma, double sigma2, const CMat* basis = nullptr);

DirectResult direct_sdr_qos(const ChannelSet& ch, const RVec& gamma, double sigma2, const DirectOptions& options = {});

/// Throws Error(InfeasibleStart) if z0 misses a target.
DirectResult direct_sca_qos(const ChannelSet& ch, const RVec& gamma, double sigma2, const BeamformerSet& z0,
                            const DirectOptions& options = {});

}  // namespace mcbf
