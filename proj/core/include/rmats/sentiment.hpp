#pragma once

#include "rmats/agent.hpp"
#include "rmats/core.hpp"
#include "rmats/market.hpp"

#include <optional>
#include <vector>

namespace rmats {

// Unit-by-time outcomes with treatment and post-period indicators.
struct PanelData {
  Matrix outcomes;  // rows = units, cols = periods
  std::vector<bool> treated;
  std::vector<bool> post;
};

struct DiDResult {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double delta = 0.0;
  double delta_se = 0.0;
};

// Saturated two-way difference-in-differences (equivalent to OLS on
// intercept, D, T and D x T). Throws Error("degenerate panel") when a
// treatment or period group is empty.
DiDResult did_estimate(const PanelData& panel);

// Builds the event panel from market data: units are assets, outcomes are
// daily log returns in percent; treated units are those whose trailing
// `window`-day return before `onset` is strictly below the cross-sectional
// median. Returns nullopt when the panel would be degenerate.
std::optional<PanelData> event_panel(const Matrix& returns, std::size_t onset_return_row, int window);

struct GrsComponents {
  double z_spread = 0.0;
  double z_vol = 0.0;
};

struct GrsCoefficients {
  double a = 1.0;
  double b = 0.5;
  double c = 2.0;
};

// Standardized defensive-minus-equity spread and cross-sectional volatility of
// the last `window` rows, scored against the up to `lookback` rows before it.
// Throws Error("insufficient history") with fewer than 10 rows.
GrsComponents geo_risk_components(const Matrix& returns, const AssetUniverse& universe, int window, int lookback);

double geo_risk_from_components(const GrsComponents& z, bool event_active, const std::optional<DiDResult>& did,
                                const GrsCoefficients& coef);

double geo_risk_score(const Matrix& returns, const AssetUniverse& universe, bool event_active,
                      const std::optional<DiDResult>& did, const StrategyConfig& cfg);

// DiD for the active event of `ctx`, if any.
std::optional<DiDResult> context_did(const MarketContext& ctx);
double context_geo_risk(const MarketContext& ctx);

AgentMessage sentiment_propose(const MarketContext& ctx, const BroadcastMessage* prior,
                               const AgentMessage* previous = nullptr);

class SentimentAgent final : public Agent {
 public:
  std::string name() const override { return "sentiment"; }
  void begin_rebalance(const MarketContext& ctx) override;
  AgentMessage propose(const MarketContext& ctx, const BroadcastMessage* prior,
                       const AgentMessage* previous) override;

 private:
  std::optional<AgentMessage> cached_;
};

}  // namespace rmats
