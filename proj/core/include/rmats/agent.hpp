#pragma once

#include "rmats/core.hpp"
#include "rmats/market.hpp"

#include <functional>
#include <memory>
#include <string>
#include <string_view>

namespace rmats {

enum class AgentKind : std::uint8_t { Sentiment = 0, Report = 1, Analysis = 2, Risk = 3 };

std::string_view to_string(AgentKind k);

// A signal agent taking part in coordination rounds. `prior` is the last
// broadcast (absent in round 1); `previous` is this agent's own proposal from
// the previous round of the same rebalance (absent in round 1).
class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::string name() const = 0;
  // Called once per rebalance before round 1; agents cache per-date state here.
  virtual void begin_rebalance(const MarketContext&) {}
  virtual AgentMessage propose(const MarketContext& ctx, const BroadcastMessage* prior,
                               const AgentMessage* previous) = 0;
};

// Fills timestamp and delta (L2 distance to the previous proposal, 0 if none).
void stamp_message(AgentMessage& m, const MarketContext& ctx, const AgentMessage* previous);

// Adapts a callable into an Agent; used for scripted agents and tests.
class FunctionAgent final : public Agent {
 public:
  using Fn = std::function<AgentMessage(const MarketContext&, const BroadcastMessage*, const AgentMessage*)>;
  FunctionAgent(std::string name, Fn fn) : name_(std::move(name)), fn_(std::move(fn)) {}
  std::string name() const override { return name_; }
  AgentMessage propose(const MarketContext& ctx, const BroadcastMessage* prior,
                       const AgentMessage* previous) override {
    return fn_(ctx, prior, previous);
  }

 private:
  std::string name_;
  Fn fn_;
};

}  // namespace rmats
