#pragma once

#include "rmats/agent.hpp"
#include "rmats/core.hpp"
#include "rmats/market.hpp"
#include "rmats/price_table.hpp"

#include <optional>

namespace rmats {

inline constexpr int kMomentumWindow = 126;
inline constexpr int kVolWindow = 63;
inline constexpr int kReversalWindow = 5;

// Cross-sectionally z-scored factor exposures, one entry per asset.
struct FactorPanel {
  Vector momentum;     // 126-day log return
  Vector low_vol;      // negated 63-day daily-return stdev
  Vector mean_rev;     // negated 5-day log return
  Vector roll_sharpe;  // 63-day mean / stdev of daily log returns

  Vector composite() const { return momentum + low_vol + mean_rev + roll_sharpe; }
};

// z-score with population stdev; a constant column maps to zeros.
Vector zscore(const Vector& raw);

// Needs at least 127 price rows; uses the trailing rows only.
FactorPanel factor_scores(const PriceTable& p);

Weights softmax_weights(const Vector& scores, double temperature);

// Spearman rank correlation with average ranks for ties; 0 if either side is constant.
double rank_correlation(const Vector& a, const Vector& b);

AgentMessage report_propose(const MarketContext& ctx, const BroadcastMessage* prior,
                            const AgentMessage* previous = nullptr);

class ReportAgent final : public Agent {
 public:
  std::string name() const override { return "report"; }
  void begin_rebalance(const MarketContext& ctx) override;
  AgentMessage propose(const MarketContext& ctx, const BroadcastMessage* prior,
                       const AgentMessage* previous) override;

 private:
  std::optional<AgentMessage> cached_;
};

}  // namespace rmats
