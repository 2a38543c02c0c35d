#include "rmats/agent.hpp"

namespace rmats {

std::string_view to_string(AgentKind k) {
  switch (k) {
    case AgentKind::Sentiment: return "sentiment";
    case AgentKind::Report: return "report";
    case AgentKind::Analysis: return "analysis";
    case AgentKind::Risk: return "risk";
  }
  return "unknown";
}

void stamp_message(AgentMessage& m, const MarketContext& ctx, const AgentMessage* previous) {
  m.timestamp = ctx.day;
  m.delta = (previous != nullptr && previous->weights.size() == m.weights.size())
                ? l2_distance(m.weights, previous->weights)
                : 0.0;
}

}  // namespace rmats
