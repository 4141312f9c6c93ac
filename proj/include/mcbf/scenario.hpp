// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mcbf/linalg.hpp"

namespace mcbf {

enum class ChannelModel { Normalized, Pathloss };

const char* to_string(ChannelModel model) noexcept;

/// Users are indexed group-major: user (i, k) has flat index offset(i) + k.
struct SystemConfig {
  int G = 3;
  std::vector<int> K{5, 5, 5};
  int N = 50;
  std::vector<double> gamma_db = std::vector<double>(15, 10.0);  // one per user
  double sigma2 = 1.0;
  double P = 10.0;
  ChannelModel channel_model = ChannelModel::Normalized;
  std::uint64_t seed = 1;

  /// G groups of K users each, every target at gamma_db.
  static SystemConfig uniform(int groups, int users, int antennas, double gamma_db = 10.0);

  int k_tot() const;
  int offset(int group) const;
  RVec gamma() const;  // linear targets
  /// Throws Error(InvalidArgument) when an invariant is violated.
  void validate() const;

  bool operator==(const SystemConfig&) const = default;
};

struct ChannelSet {
  std::vector<CMat> H;     // N x K_i, columns h_ik
  std::vector<RVec> beta;  // K_i large-scale variances

  int groups() const { return static_cast<int>(H.size()); }
  int antennas() const { return H.empty() ? 0 : static_cast<int>(H.front().rows()); }
  int users(int group) const { return static_cast<int>(H[static_cast<std::size_t>(group)].cols()); }
  int k_tot() const;
  CVec h(int group, int user) const { return H[static_cast<std::size_t>(group)].col(user); }
  /// All channels side by side, N x K_tot in flat user order.
  CMat stacked() const;
  RVec beta_flat() const;
  /// Throws Error(DimensionMismatch) when shapes disagree with cfg.
  void check(const SystemConfig& cfg) const;

  bool operator==(const ChannelSet& o) const;
};

/// Entries i.i.d. CN(0, 1), beta = 1.
ChannelSet gen_normalized_channels(const SystemConfig& cfg, std::uint64_t seed);

struct PathlossDraw {
  ChannelSet channels;
  std::vector<RVec> distances;
};

inline constexpr double kInnerRadius = 0.1;

/// Pathloss constant giving beta / sigma2 = -5 dB at unit distance.
double pathloss_constant(double sigma2);

/// Users uniform over the annulus kInnerRadius <= d <= 1, beta = xi d^-3.
PathlossDraw gen_pathloss_channels(const SystemConfig& cfg, std::uint64_t seed);

/// Dispatches on cfg.channel_model.
ChannelSet gen_channels(const SystemConfig& cfg, std::uint64_t seed);

struct Scenario {
  SystemConfig config;
  std::optional<ChannelSet> channels;

  bool operator==(const Scenario&) const = default;
};

std::string scenario_to_json(const Scenario& scenario);
/// Throws Error(ParseError) naming the line or field at fault.
Scenario scenario_from_json(const std::string& text);
void save_scenario(const std::string& path, const Scenario& scenario);
Scenario load_scenario(const std::string& path);

}  // namespace mcbf
