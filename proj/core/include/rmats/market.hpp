#pragma once

#include "rmats/config.hpp"
#include "rmats/core.hpp"
#include "rmats/price_table.hpp"
#include "rmats/universe.hpp"

#include <optional>

namespace rmats {

// Everything an agent may observe at one rebalance date. `prices` ends at the
// decision date (inclusive); nothing later is reachable from here.
struct MarketContext {
  const AssetUniverse& universe;
  const StrategyConfig& config;
  PriceTable prices;  // tradable columns only, rows [0, t]
  Matrix returns;     // log_returns(prices)
  long day = 0;       // index of the decision date in the full calendar

  bool event_active = false;
  std::optional<std::size_t> event_onset_row;  // price row (within `prices`) where the active event began

  Weights holdings;           // drifted portfolio weights going into this rebalance
  double drawdown = 0.0;      // strategy drawdown at the decision date
  double trailing_geo = 0.0;  // mean consensus geo risk over previous rebalances

  MarketContext(const AssetUniverse& u, const StrategyConfig& c, PriceTable p);

  std::size_t n() const { return universe.size(); }
  std::size_t history() const { return prices.rows(); }
};

}  // namespace rmats
