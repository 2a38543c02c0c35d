#pragma once

#include "rmats/agent.hpp"
#include "rmats/core.hpp"
#include "rmats/events.hpp"
#include "rmats/market.hpp"
#include "rmats/optimizer.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rmats {

inline constexpr double kCovRidge = 1e-10;
inline constexpr int kCovInitRows = 30;

// EWMA recursion seeded with the sample covariance of the first 30 rows.
// Throws Error when T < 30 or the result is not PSD.
Matrix ewma_covariance(const Matrix& returns, double decay);

struct TailRisk {
  double var = 0.0;
  double cvar = 0.0;
  double alpha = 0.95;
};

// Historical VaR/CVaR with a lower-interpolated (1-alpha) quantile; losses are
// reported as positive fractions.
TailRisk historical_cvar(const std::vector<double>& pnl, double alpha);

struct RiskThresholds {
  double theta_dd = 0.08;
  double theta_geo = 0.75;
  double theta_vol = 0.25;
};

bool circuit_breaker(double dd, double grs, double vol, const RiskThresholds& th);

struct Scenario {
  std::string name;
  Vector shock;  // per-asset return fractions
};

// loss_s = -w'shock_s
std::vector<double> stress_test(const Weights& w, const std::vector<Scenario>& scenarios);

// `scenario,<T1>,...` header; columns are reordered to `tickers`, every ticker
// must be present.
std::vector<Scenario> read_scenarios(std::istream& in, const std::vector<std::string>& tickers,
                                     std::string_view source = "<stream>");
std::vector<Scenario> load_scenarios(const std::filesystem::path& path, const std::vector<std::string>& tickers);
void write_scenarios(std::ostream& out, const std::vector<std::string>& tickers, const std::vector<Scenario>& s);

// Worst 5-day equal-weight move inside each event window; the shock is each
// asset's simple return over that 5-day span. Events with fewer than 6 price
// rows are skipped.
std::vector<Scenario> calibrate_scenarios(const PriceTable& prices, const std::vector<EventWindow>& events);

// Minimum-variance weights (mu = 0) under the given constraints.
Weights min_variance(const Matrix& sigma, const OptConstraints& cons, const OptimizerSettings& settings);

// Per-date quantities the risk agent reuses across rounds.
struct RiskView {
  Matrix sigma;
  double grs = 0.0;
  double portfolio_vol = 0.0;  // annualized, current holdings
  double universe_vol = 0.0;   // annualized, equal weight
  bool breaker = false;
};

RiskView risk_view(const MarketContext& ctx);

AgentMessage risk_propose(const MarketContext& ctx, const BroadcastMessage* prior, const RiskView& view,
                          const AgentMessage* previous = nullptr);

class RiskAgent final : public Agent {
 public:
  std::string name() const override { return "risk"; }
  void begin_rebalance(const MarketContext& ctx) override;
  AgentMessage propose(const MarketContext& ctx, const BroadcastMessage* prior,
                       const AgentMessage* previous) override;

 private:
  std::optional<RiskView> view_;
  long view_day_ = -1;
  std::map<double, AgentMessage> by_budget_;
};

}  // namespace rmats
