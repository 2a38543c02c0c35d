#pragma once

#include "rmats/agent.hpp"
#include "rmats/config.hpp"
#include "rmats/core.hpp"
#include "rmats/market.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rmats {

struct HealthInputs {
  double accuracy = 0.0;
  double stability = 0.0;
  double risk_adj_profit = 0.0;
  double latency = 0.0;
};

struct HealthWeights {
  double alpha = 0.4;
  double beta = 0.2;
  double gamma = 0.3;
  double delta = 0.1;
};

// alpha*A + beta*S + gamma*R - delta*L clipped to [0,1].
double health_score(const HealthInputs& h, const HealthWeights& w);

struct AggregateResult {
  Weights weights;
  bool fallback = false;  // every c_i*H_i was zero; unweighted mean used
};

AggregateResult aggregate(const std::vector<AgentMessage>& messages, const std::vector<double>& healths);

bool converged(const Weights& w_new, const Weights& w_prev, double eps = 0.008);

// Confidence-weighted mean geo risk (plain mean when all confidences are 0).
double consensus_geo(const std::vector<AgentMessage>& messages);
// Health-weighted regime vote, ties broken Stress > Bear > Bull.
Regime consensus_regime(const std::vector<AgentMessage>& messages, const std::vector<double>& healths);

struct RoundRecord {
  int round = 0;
  std::vector<AgentMessage> messages;
  BroadcastMessage broadcast;
  std::optional<double> aggregate_delta;  // absent in round 1
  bool fallback = false;
};

struct CoordinationOutcome {
  Weights final_weights;
  int rounds_used = 0;
  bool converged = false;
  std::vector<double> deltas;  // ||w^r - w^{r-1}|| for r = 2..rounds_used
  bool override_fired = false;
  int override_agent = -1;
  double opening_delta = 0.0;  // ||w^1 - holdings||
  std::vector<std::string> agent_names;
  std::vector<RoundRecord> rounds;
};

// Runs the recursive protocol for one rebalance. Any agent exception aborts
// the rebalance; invalid messages raise Error naming the agent.
CoordinationOutcome coordinate(const MarketContext& ctx, const std::vector<Agent*>& agents,
                               const std::vector<double>& healths, const StrategyConfig& cfg);

// Tracks per-agent health across rebalances of one backtest.
class HealthTracker {
 public:
  HealthTracker(std::size_t agents, const StrategyConfig& cfg);

  // Inputs for the next rebalance given log returns through the decision date
  // (row j is the return into price row j + 1).
  std::vector<HealthInputs> inputs(const Matrix& log_returns) const;
  std::vector<double> healths(const Matrix& log_returns) const;

  // Stores each agent's final proposal and the rounds it needed.
  void record(const CoordinationOutcome& outcome, long day);

 private:
  struct Proposal {
    long day = 0;
    Vector weights;
  };
  std::size_t agents_;
  StrategyConfig cfg_;
  std::vector<std::vector<Proposal>> history_;
  std::vector<double> stability_;
  std::vector<double> latency_;
};

}  // namespace rmats
