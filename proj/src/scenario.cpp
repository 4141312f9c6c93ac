// SPDX-License-Identifier: Apache-2.0
#include "mcbf/scenario.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "mcbf/error.hpp"
#include "mcbf/rng.hpp"

namespace mcbf {

using nlohmann::json;

const char* to_string(ChannelModel model) noexcept {
  return model == ChannelModel::Pathloss ? "pathloss" : "normalized";
}

SystemConfig SystemConfig::uniform(int groups, int users, int antennas, double gamma_db) {
  SystemConfig cfg;
  cfg.G = groups;
  cfg.K.assign(static_cast<std::size_t>(groups), users);
  cfg.N = antennas;
  cfg.gamma_db.assign(static_cast<std::size_t>(groups * users), gamma_db);
  return cfg;
}

int SystemConfig::k_tot() const { return std::accumulate(K.begin(), K.end(), 0); }

int SystemConfig::offset(int group) const {
  return std::accumulate(K.begin(), K.begin() + group, 0);
}

RVec SystemConfig::gamma() const {
  RVec g(static_cast<Eigen::Index>(gamma_db.size()));
  for (std::size_t u = 0; u < gamma_db.size(); ++u) {
    g(static_cast<Eigen::Index>(u)) = std::pow(10.0, gamma_db[u] / 10.0);
  }
  return g;
}

void SystemConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); };
  if (G < 1) fail("G must be >= 1");
  if (static_cast<int>(K.size()) != G) fail("K must list one user count per group");
  for (int k : K) {
    if (k < 1) fail("every group needs at least one user");
  }
  if (N < 1) fail("N must be >= 1");
  if (static_cast<int>(gamma_db.size()) != k_tot()) fail("gamma_db must have one entry per user");
  for (double g : gamma_db) {
    if (!std::isfinite(g)) fail("gamma_db entries must be finite");
  }
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) fail("sigma2 must be positive");
  if (!(P > 0.0) || !std::isfinite(P)) fail("P must be positive");
}

int ChannelSet::k_tot() const {
  int n = 0;
  for (const auto& h : H) n += static_cast<int>(h.cols());
  return n;
}

CMat ChannelSet::stacked() const {
  CMat all(antennas(), k_tot());
  Eigen::Index col = 0;
  for (const auto& h : H) {
    all.middleCols(col, h.cols()) = h;
    col += h.cols();
  }
  return all;
}

RVec ChannelSet::beta_flat() const {
  RVec b(k_tot());
  Eigen::Index u = 0;
  for (const auto& bi : beta) {
    b.segment(u, bi.size()) = bi;
    u += bi.size();
  }
  return b;
}

void ChannelSet::check(const SystemConfig& cfg) const {
  if (groups() != cfg.G || beta.size() != H.size()) {
    throw Error(ErrorCode::DimensionMismatch, "channel set has the wrong number of groups");
  }
  for (int i = 0; i < cfg.G; ++i) {
    const auto& h = H[static_cast<std::size_t>(i)];
    if (h.rows() != cfg.N || h.cols() != cfg.K[static_cast<std::size_t>(i)] ||
        beta[static_cast<std::size_t>(i)].size() != h.cols()) {
      throw Error(ErrorCode::DimensionMismatch, "channel matrix of group " + std::to_string(i) + " has wrong shape");
    }
  }
}

bool ChannelSet::operator==(const ChannelSet& o) const {
  if (H.size() != o.H.size() || beta.size() != o.beta.size()) return false;
  for (std::size_t i = 0; i < H.size(); ++i) {
    if (H[i].rows() != o.H[i].rows() || H[i].cols() != o.H[i].cols() || H[i] != o.H[i]) return false;
  }
  for (std::size_t i = 0; i < beta.size(); ++i) {
    if (beta[i].size() != o.beta[i].size() || beta[i] != o.beta[i]) return false;
  }
  return true;
}

namespace {

ChannelSet small_scale(const SystemConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const CounterRng rng(seed, 0);
  ChannelSet ch;
  const auto n_ant = static_cast<std::uint64_t>(cfg.N);
  std::uint64_t user = 0;
  for (int i = 0; i < cfg.G; ++i) {
    const int k_i = cfg.K[static_cast<std::size_t>(i)];
    CMat h(cfg.N, k_i);
    for (int k = 0; k < k_i; ++k, ++user) {
      for (int n = 0; n < cfg.N; ++n) h(n, k) = rng.complex_normal(user * n_ant + static_cast<std::uint64_t>(n));
    }
    ch.H.push_back(std::move(h));
    ch.beta.push_back(RVec::Ones(k_i));
  }
  return ch;
}

}  // namespace

ChannelSet gen_normalized_channels(const SystemConfig& cfg, std::uint64_t seed) {
  return small_scale(cfg, seed);
}

double pathloss_constant(double sigma2) { return sigma2 * std::pow(10.0, -0.5); }

PathlossDraw gen_pathloss_channels(const SystemConfig& cfg, std::uint64_t seed) {
  PathlossDraw out;
  out.channels = small_scale(cfg, seed);
  const CounterRng rng(seed, 1);
  const double xi = pathloss_constant(cfg.sigma2);
  const double r0 = kInnerRadius * kInnerRadius;
  std::uint64_t user = 0;
  for (int i = 0; i < cfg.G; ++i) {
    const int k_i = cfg.K[static_cast<std::size_t>(i)];
    RVec d(k_i);
    for (int k = 0; k < k_i; ++k, ++user) {
      d(k) = std::sqrt(r0 + rng.uniform(user) * (1.0 - r0));
      const double b = xi / (d(k) * d(k) * d(k));
      out.channels.beta[static_cast<std::size_t>(i)](k) = b;
      out.channels.H[static_cast<std::size_t>(i)].col(k) *= std::sqrt(b);
    }
    out.distances.push_back(std::move(d));
  }
  return out;
}

ChannelSet gen_channels(const SystemConfig& cfg, std::uint64_t seed) {
  if (cfg.channel_model == ChannelModel::Pathloss) return gen_pathloss_channels(cfg, seed).channels;
  return gen_normalized_channels(cfg, seed);
}

// ---- JSON ----

namespace {

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::ParseError, "field '" + field + "': " + what);
}

const json& require(const json& obj, const std::string& field) {
  auto it = obj.find(field);
  if (it == obj.end()) field_error(field, "missing");
  return *it;
}

template <class T>
T get_as(const json& v, const std::string& field) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    field_error(field, std::string("expected ") + (std::is_integral_v<T> ? "integer" : "number"));
  }
}

json matrix_to_json(const CMat& m) {
  json cols = json::array();
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    json col = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      col.push_back(m(r, c).real());
      col.push_back(m(r, c).imag());
    }
    cols.push_back(std::move(col));
  }
  return cols;
}

CMat matrix_from_json(const json& j, const std::string& field, int rows, int cols) {
  if (!j.is_array() || static_cast<int>(j.size()) != cols) field_error(field, "expected " + std::to_string(cols) + " columns");
  CMat m(rows, cols);
  for (int c = 0; c < cols; ++c) {
    const auto& col = j[static_cast<std::size_t>(c)];
    if (!col.is_array() || static_cast<int>(col.size()) != 2 * rows) {
      field_error(field, "column " + std::to_string(c) + " must hold " + std::to_string(2 * rows) + " interleaved re/im values");
    }
    for (int r = 0; r < rows; ++r) {
      m(r, c) = cdouble(get_as<double>(col[static_cast<std::size_t>(2 * r)], field),
                        get_as<double>(col[static_cast<std::size_t>(2 * r + 1)], field));
    }
  }
  return m;
}

}  // namespace

std::string scenario_to_json(const Scenario& scenario) {
  const auto& cfg = scenario.config;
  json j;
  j["G"] = cfg.G;
  j["K"] = cfg.K;
  j["N"] = cfg.N;
  const bool equal_targets = std::all_of(cfg.gamma_db.begin(), cfg.gamma_db.end(),
                                         [&](double g) { return g == cfg.gamma_db.front(); });
  if (equal_targets && !cfg.gamma_db.empty()) {
    j["gamma_db"] = cfg.gamma_db.front();
  } else {
    j["gamma_db"] = cfg.gamma_db;
  }
  j["sigma2"] = cfg.sigma2;
  j["P"] = cfg.P;
  j["channel_model"] = to_string(cfg.channel_model);
  j["seed"] = cfg.seed;
  if (scenario.channels) {
    json h = json::array();
    json b = json::array();
    for (std::size_t i = 0; i < scenario.channels->H.size(); ++i) {
      h.push_back(matrix_to_json(scenario.channels->H[i]));
      b.push_back(std::vector<double>(scenario.channels->beta[i].begin(), scenario.channels->beta[i].end()));
    }
    j["channels"] = {{"H", std::move(h)}, {"beta", std::move(b)}};
  }
  return j.dump(2) + "\n";
}

Scenario scenario_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "top level must be an object");

  Scenario sc;
  auto& cfg = sc.config;
  cfg.G = get_as<int>(require(j, "G"), "G");
  const auto& k = require(j, "K");
  if (k.is_number_integer()) {
    cfg.K.assign(static_cast<std::size_t>(std::max(cfg.G, 0)), k.get<int>());
  } else {
    cfg.K = get_as<std::vector<int>>(k, "K");
  }
  cfg.N = get_as<int>(require(j, "N"), "N");
  const auto& g = require(j, "gamma_db");
  if (g.is_number()) {
    cfg.gamma_db.assign(static_cast<std::size_t>(std::max(cfg.k_tot(), 0)), g.get<double>());
  } else if (g.is_array() && !g.empty() && g.front().is_array()) {
    cfg.gamma_db.clear();
    for (const auto& gi : g) {
      auto row = get_as<std::vector<double>>(gi, "gamma_db");
      cfg.gamma_db.insert(cfg.gamma_db.end(), row.begin(), row.end());
    }
  } else {
    cfg.gamma_db = get_as<std::vector<double>>(g, "gamma_db");
  }
  cfg.sigma2 = get_as<double>(require(j, "sigma2"), "sigma2");
  cfg.P = get_as<double>(require(j, "P"), "P");
  if (auto it = j.find("channel_model"); it != j.end()) {
    const auto model = it->is_string() ? it->get<std::string>() : std::string();
    if (model == "normalized") {
      cfg.channel_model = ChannelModel::Normalized;
    } else if (model == "pathloss") {
      cfg.channel_model = ChannelModel::Pathloss;
    } else {
      field_error("channel_model", "expected \"normalized\" or \"pathloss\"");
    }
  }
  if (auto it = j.find("seed"); it != j.end()) cfg.seed = get_as<std::uint64_t>(*it, "seed");
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }

  if (auto it = j.find("channels"); it != j.end()) {
    const auto& hs = require(*it, "H");
    const auto& bs = require(*it, "beta");
    if (!hs.is_array() || static_cast<int>(hs.size()) != cfg.G) field_error("channels.H", "expected one matrix per group");
    if (!bs.is_array() || static_cast<int>(bs.size()) != cfg.G) field_error("channels.beta", "expected one list per group");
    ChannelSet ch;
    for (int i = 0; i < cfg.G; ++i) {
      const int k_i = cfg.K[static_cast<std::size_t>(i)];
      const std::string name = "channels.H[" + std::to_string(i) + "]";
      ch.H.push_back(matrix_from_json(hs[static_cast<std::size_t>(i)], name, cfg.N, k_i));
      auto b = get_as<std::vector<double>>(bs[static_cast<std::size_t>(i)], "channels.beta");
      if (static_cast<int>(b.size()) != k_i) field_error("channels.beta[" + std::to_string(i) + "]", "wrong length");
      ch.beta.push_back(Eigen::Map<RVec>(b.data(), k_i));
    }
    sc.channels = std::move(ch);
  }
  return sc;
}

void save_scenario(const std::string& path, const Scenario& scenario) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  out << scenario_to_json(scenario);
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return scenario_from_json(buf.str());
}

}  // namespace mcbf
