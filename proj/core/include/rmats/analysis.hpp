#pragma once

#include "rmats/agent.hpp"
#include "rmats/hmm.hpp"
#include "rmats/kalman.hpp"
#include "rmats/market.hpp"

#include <array>
#include <optional>
#include <vector>

namespace rmats {

// Observation rows for the regime model: (universe mean daily log return,
// rolling mean of the daily cross-sectional stdev over `vol_window` days).
// The first vol_window - 1 return rows are consumed by the rolling window.
Matrix regime_observations(const Matrix& returns, int vol_window);

// What the analysis agent knows at one rebalance date.
struct RegimeView {
  std::array<double, 3> regime_probability{};  // indexed by Regime
  double fused_signal = 0.0;                   // Kalman composite Z
};

// argmax over regimes with ties broken Stress > Bear > Bull.
Regime most_likely_regime(const std::array<double, 3>& p);

Weights regime_template(const AssetUniverse& universe, const StrategyConfig& cfg, Regime r);

AgentMessage analysis_propose(const MarketContext& ctx, const BroadcastMessage* prior, const RegimeView& view,
                              const AgentMessage* previous = nullptr);

// Fits the regime model once per rebalance (trailing hmm.window days) and
// advances the Kalman composite once per rebalance. Kalman state persists
// across rebalances, so one instance must serve one backtest.
class AnalysisAgent final : public Agent {
 public:
  std::string name() const override { return "analysis"; }
  void begin_rebalance(const MarketContext& ctx) override;
  AgentMessage propose(const MarketContext& ctx, const BroadcastMessage* prior,
                       const AgentMessage* previous) override;

  const std::optional<RegimeView>& view() const { return view_; }
  const KalmanState& kalman() const { return kalman_; }

 private:
  void prepare(const MarketContext& ctx);

  std::optional<RegimeView> view_;
  long view_day_ = -1;
  bool kalman_ready_ = false;
  KalmanState kalman_;
};

}  // namespace rmats
