#pragma once

#include <cstdint>
#include <string>

#include "fairsar/environment.hpp"
#include "fairsar/types.hpp"

namespace fairsar {

// Flat `key = value` config with fixed [stream]/[algo]/[eval]/[out]
// sections. Unknown sections or keys are errors so stale configs fail fast.

struct StreamConfig {
  std::string kind = "synthetic";  // synthetic | csv
  std::string path;                // csv input (may end in .gz)
  std::string preset = "stationary";
  long rounds = 32;
  long dim = 2;
  long points_per_task = 32;
  double group1_prob = 0.5;
  double group_bias = 0.0;
  double group_shift = 0.0;
  double label_bias = 0.0;  // bias entry of the ground-truth weights
  std::uint64_t seed = 1;

  friend bool operator==(const StreamConfig&, const StreamConfig&) = default;
};

struct AlgoConfig {
  std::string name = "fairsaoml";  // fairsaoml | masked | staticpd | ogd
  int base = 2;
  int constraints = 1;
  std::string constraint_mode = "ddp";  // ddp | deo
  double epsilon = 0.05;
  double eta1 = 0.1;
  double eta2 = 0.1;
  double delta = 50.0;
  int n_meta = 1;
  int n_inner = 1;
  double support_frac = 0.4;
  bool strongly_convex = false;
  double l2_mu = 1e-3;
  std::string ablation = "none";  // none | no_weights | no_base
  std::uint64_t seed = 7;
  std::string compare_with = "masked,staticpd,ogd";
  std::string compare_ablations = "no_weights,no_base";

  friend bool operator==(const AlgoConfig&, const AlgoConfig&) = default;
};

struct EvalConfig {
  std::string tau;  // comma-separated window lengths, may be empty
  long window = 10;
  double comparator_tol = 1e-3;
  long comparator_max_iters = 100000;

  friend bool operator==(const EvalConfig&, const EvalConfig&) = default;
};

struct OutConfig {
  std::string dir = "out";

  friend bool operator==(const OutConfig&, const OutConfig&) = default;
};

struct Config {
  StreamConfig stream;
  AlgoConfig algo;
  EvalConfig eval;
  OutConfig out;

  friend bool operator==(const Config&, const Config&) = default;
};

Config parse_config_text(const std::string& text, const std::string& origin);
Config parse_config(const std::string& path);
std::string serialize_config(const Config& cfg);

/// Synthetic-stream spec for the configured preset. Presets share the same
/// randomly drawn ground-truth weights across segments; drift comes from
/// feature flips or per-segment bias scaling.
EnvironmentSpec build_environment(const StreamConfig& stream);

}  // namespace fairsar
