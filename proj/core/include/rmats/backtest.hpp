#pragma once

#include "rmats/config.hpp"
#include "rmats/coordination.hpp"
#include "rmats/core.hpp"
#include "rmats/events.hpp"
#include "rmats/market.hpp"
#include "rmats/price_table.hpp"

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rmats {

struct Decision {
  Weights weights;
  std::optional<CoordinationOutcome> coordination;
};

// A weight-proposing strategy. `decide` sees only the context; it may set
// context fields it owns (trailing_geo) before consulting agents.
class Strategy {
 public:
  virtual ~Strategy() = default;
  virtual std::string name() const = 0;
  virtual Decision decide(MarketContext& ctx) = 0;
};

struct Rebalance {
  std::size_t row = 0;  // index into the price calendar
  Date date;
  Weights weights;
  double turnover = 0.0;
  double cost = 0.0;
  bool event_active = false;
  std::optional<CoordinationOutcome> coordination;
};

struct BacktestResult {
  std::string strategy;
  std::vector<std::string> tickers;
  std::vector<Date> dates;     // simulation calendar
  std::vector<double> equity;  // pre-trade close value per date; equity[0] = initial equity
  std::vector<Rebalance> rebalances;
};

// Tradable universe and price columns (benchmark dropped).
struct TradableData {
  AssetUniverse universe;
  PriceTable prices;
};
TradableData tradable_data(const PriceTable& prices, const StrategyConfig& cfg);

// Rebalance rows: the first simulated row and every first trading day of a
// month after it, excluding the final row.
std::vector<std::size_t> rebalance_rows(const PriceTable& prices, std::size_t first, std::size_t last);

// Monthly rebalanced simulation over [cfg.start, cfg.end] with proportional
// costs. Throws Error("insufficient warm-up ...") when fewer than cfg.warmup
// rows precede the first simulated date.
BacktestResult run_backtest(Strategy& strategy, const PriceTable& prices, const StrategyConfig& cfg,
                            const std::vector<EventWindow>& events = default_events());

struct Metrics {
  double ann_return = 0.0;
  double sharpe = 0.0;
  double mdd = 0.0;
  double calmar = 0.0;
  double volatility = 0.0;  // annualized
  bool sharpe_degenerate = false;
  bool calmar_degenerate = false;
};

Metrics performance_metrics(const std::vector<double>& equity, double risk_free = 0.0);
Metrics performance_metrics(const BacktestResult& result, const StrategyConfig& cfg);

double max_drawdown(const std::vector<double>& equity);

struct EventResult {
  std::string name;
  double cumulative_return = 0.0;
  double drawdown = 0.0;
};

struct EventTable {
  std::vector<EventResult> events;
  double avg_edd = 0.0;
};

EventTable event_window_returns(const std::vector<Date>& dates, const std::vector<double>& equity,
                                const std::vector<EventWindow>& events);
EventTable event_window_returns(const BacktestResult& result, const std::vector<EventWindow>& events);

// Names: rmats, mvo, multifactor, sentiment_proxy, equal_weight.
const std::vector<std::string>& strategy_names();
std::unique_ptr<Strategy> make_strategy(std::string_view name, const StrategyConfig& cfg);

struct AgentSelection {
  bool sentiment = true;
  bool report = true;
  bool analysis = true;
  bool risk = true;
};

std::unique_ptr<Strategy> make_rmats(const StrategyConfig& cfg, AgentSelection agents = {});

// Variants: full, no_recursion, no_sentiment, no_risk, no_analysis, no_did.
const std::vector<std::string>& ablation_variants();

struct AblationRow {
  std::string variant;
  Metrics metrics;
  double avg_edd = 0.0;
  int max_rounds = 0;
  BacktestResult result;
};

// Each variant is an independent backtest; variants run concurrently.
std::vector<AblationRow> run_ablation(const PriceTable& prices, const StrategyConfig& cfg,
                                      const std::vector<std::string>& variants,
                                      const std::vector<EventWindow>& events = default_events());

// Per-rebalance summary of a coordination outcome.
struct ConvergenceLog {
  std::string date;
  int rounds_used = 0;
  bool converged = false;
  bool override_fired = false;
  bool stress = false;
  double opening_delta = 0.0;
  std::vector<double> deltas;
};

struct ConvergenceSummary {
  std::size_t count = 0;
  double median_rounds = 0.0;
  double mean_rounds = 0.0;
  int max_rounds = 0;
  double fraction_within_2 = 0.0;
  std::vector<double> delta_curve;  // mean delta per round index, starting at round 2
  double opening_delta_mean = 0.0;  // over rebalances that reached round 2
  double first_drop = 0.0;          // 1 - curve[0] / opening_delta_mean
};

struct ConvergenceStats {
  ConvergenceSummary all;
  ConvergenceSummary normal;
  ConvergenceSummary stress;
};

ConvergenceSummary convergence_summary(const std::vector<ConvergenceLog>& logs);
ConvergenceStats convergence_stats(const std::vector<ConvergenceLog>& logs);
std::vector<ConvergenceLog> convergence_logs(const BacktestResult& result);

// Long-format round log: rebalance,round,agent,field,value.
void write_rounds(std::ostream& out, const BacktestResult& result);
std::vector<ConvergenceLog> read_rounds(std::istream& in, std::string_view source = "<stream>");

}  // namespace rmats
