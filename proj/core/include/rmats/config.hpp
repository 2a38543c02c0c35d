#pragma once

#include "rmats/price_table.hpp"
#include "rmats/universe.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rmats {

using GroupFractions = std::array<double, kTemplateGroupCount>;
using ClassFractions = std::array<double, kAssetClassCount>;

// Every tunable of the engine with its pinned default. Loaded from a flat
// `key=value` file (`#` starts a comment); unknown keys are rejected.
struct StrategyConfig {
  // coordination
  double eps = 0.008;
  int r_max = 8;
  double health_alpha = 0.4;
  double health_beta = 0.2;
  double health_gamma = 0.3;
  double health_delta = 0.1;
  double health_init = 0.5;
  int health_window = 63;

  // reward shaping
  double lambda1 = 0.8;
  double lambda2 = 1.5;
  double theta = 0.05;

  // risk
  double ewma_decay = 0.94;
  int ewma_window = 252;
  double cvar_alpha = 0.95;
  double cvar_budget = 0.03;
  int cvar_window = 252;
  double theta_dd = 0.08;
  double theta_geo = 0.75;
  double theta_vol = 0.25;
  double geo_adapt = 0.25;

  // sentiment
  double grs_a = 1.0;
  double grs_b = 0.5;
  double grs_c = 2.0;
  int grs_window = 20;
  int grs_lookback = 252;
  double sentiment_stress = 0.7;
  double sentiment_bear = 0.5;
  double sentiment_conf_min = 0.3;
  double sentiment_conf_max = 1.0;
  int did_window = 20;

  // analysis
  int hmm_window = 504;
  int hmm_max_iter = 200;
  double hmm_tol = 1e-6;
  int hmm_vol_window = 20;
  double analysis_blend = 0.5;
  double kalman_q = 1e-4;
  double kalman_r = 0.01;
  GroupFractions template_bull{0.45, 0.20, 0.15, 0.05, 0.15};
  GroupFractions template_bear{0.25, 0.10, 0.40, 0.15, 0.10};
  GroupFractions template_stress{0.10, 0.05, 0.55, 0.25, 0.05};

  // report
  double report_temperature = 2.0;
  double report_conf_min = 0.2;
  double report_conf_max = 0.9;
  int report_conf_window = 21;

  // optimizer
  double risk_aversion = 5.0;
  double opt_step = 0.01;
  int opt_iterations = 500;
  int proj_cycles = 100;
  double proj_tol = 1e-9;
  double gamma0 = 0.6;
  double geo_tighten = 0.5;
  ClassFractions caps{0.5, 0.5, 0.5, 0.5};
  ClassFractions geo_sens{0.7, 0.9, 0.1, 0.6};
  double geo_sens_defensive = 0.2;
  int mu_window = 126;
  double mu_shrink = 0.5;
  std::vector<double> mvo_lambda_grid;

  // backtest
  double cost_bps = 10.0;
  Date start{std::chrono::year{2023}, std::chrono::January, std::chrono::day{1}};
  Date end{std::chrono::year{2025}, std::chrono::March, std::chrono::day{31}};
  double initial_equity = 1.0;
  double risk_free = 0.0;
  int warmup = 504;
  std::string benchmark;

  std::uint64_t seed = 7;

  // universe
  std::map<std::string, AssetClass, std::less<>> class_overrides;
  std::optional<std::vector<std::string>> defensive;

  // Throws ValidationError naming the offending key.
  void set(std::string_view key, std::string_view value);
  // Cross-field checks (health weights, caps feasibility, date order, ...).
  void validate() const;

  // All keys in canonical order with their current values.
  std::vector<std::pair<std::string, std::string>> entries() const;

  // Tradable universe for the given price columns (benchmark excluded).
  AssetUniverse universe_for(const std::vector<std::string>& tickers) const;
};

StrategyConfig parse_config(std::istream& in, std::string_view source = "<stream>");
StrategyConfig load_config(const std::filesystem::path& path);

// Generic flat key=value reader shared by config and synth spec files.
// Returns (line number, key, value) triples; throws ValidationError on a line
// without '=' or a duplicate key.
struct KeyValue {
  std::size_t line = 0;
  std::string key;
  std::string value;
};
std::vector<KeyValue> read_key_values(std::istream& in, std::string_view source);

}  // namespace rmats
