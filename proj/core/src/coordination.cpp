#include "rmats/coordination.hpp"

#include "rmats/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace rmats {

double health_score(const HealthInputs& h, const HealthWeights& w) {
  const double raw = w.alpha * h.accuracy + w.beta * h.stability + w.gamma * h.risk_adj_profit - w.delta * h.latency;
  return std::clamp(raw, 0.0, 1.0);
}

AggregateResult aggregate(const std::vector<AgentMessage>& messages, const std::vector<double>& healths) {
  if (messages.empty()) throw Error("aggregate: no messages");
  if (healths.size() != messages.size()) throw Error("aggregate: health count does not match messages");
  const auto n = static_cast<Eigen::Index>(messages.front().weights.size());
  Vector sum = Vector::Zero(n);
  double total = 0.0;
  for (std::size_t i = 0; i < messages.size(); ++i) {
    if (static_cast<Eigen::Index>(messages[i].weights.size()) != n) throw Error("aggregate: weight length mismatch");
    if (!(healths[i] >= 0.0)) throw Error("aggregate: negative health");
    const double k = messages[i].confidence * healths[i];
    sum += k * messages[i].weights.values();
    total += k;
  }
  AggregateResult out;
  if (total > 0.0) {
    out.weights = Weights(sum / total);
    return out;
  }
  sum.setZero();
  for (const auto& m : messages) sum += m.weights.values();
  out.weights = Weights(sum / static_cast<double>(messages.size()));
  out.fallback = true;
  return out;
}

bool converged(const Weights& w_new, const Weights& w_prev, double eps) {
  if (w_new.size() != w_prev.size()) throw Error("converged: length mismatch");
  return l2_distance(w_new, w_prev) < eps;
}

double consensus_geo(const std::vector<AgentMessage>& messages) {
  if (messages.empty()) return 0.0;
  double num = 0.0, den = 0.0, plain = 0.0;
  for (const auto& m : messages) {
    num += m.confidence * m.geo_risk;
    den += m.confidence;
    plain += m.geo_risk;
  }
  return den > 0.0 ? num / den : plain / static_cast<double>(messages.size());
}

Regime consensus_regime(const std::vector<AgentMessage>& messages, const std::vector<double>& healths) {
  std::array<double, 3> votes{};
  for (std::size_t i = 0; i < messages.size(); ++i) {
    votes[static_cast<std::size_t>(messages[i].regime)] += i < healths.size() ? healths[i] : 0.0;
  }
  Regime best = Regime::Stress;
  for (Regime r : {Regime::Stress, Regime::Bear, Regime::Bull}) {
    if (votes[static_cast<std::size_t>(r)] > votes[static_cast<std::size_t>(best)]) best = r;
  }
  return best;
}

CoordinationOutcome coordinate(const MarketContext& ctx, const std::vector<Agent*>& agents,
                               const std::vector<double>& healths, const StrategyConfig& cfg) {
  if (agents.empty()) throw Error("coordinate: no agents");
  if (healths.size() != agents.size()) throw Error("coordinate: health count does not match agents");
  if (cfg.r_max < 1) throw Error("coordinate: r_max must be at least 1");

  CoordinationOutcome out;
  for (auto* a : agents) {
    out.agent_names.push_back(a->name());
    a->begin_rebalance(ctx);
  }

  std::vector<AgentMessage> previous;
  std::optional<BroadcastMessage> broadcast;
  for (int r = 1; r <= cfg.r_max; ++r) {
    std::vector<AgentMessage> messages;
    messages.reserve(agents.size());
    for (std::size_t i = 0; i < agents.size(); ++i) {
      AgentMessage m = agents[i]->propose(ctx, broadcast ? &*broadcast : nullptr, previous.empty() ? nullptr : &previous[i]);
      const auto problems = validate_message(m, ctx.n());
      if (!problems.empty()) throw Error("agent '" + out.agent_names[i] + "' sent an invalid message: " + problems.front());
      messages.push_back(std::move(m));
    }

    RoundRecord rec;
    rec.round = r;
    out.rounds_used = r;

    int override_idx = -1;
    for (std::size_t i = 0; i < messages.size(); ++i) {
      if (messages[i].circuit_breaker) {
        override_idx = static_cast<int>(i);
        break;
      }
    }

    Weights agg;
    if (override_idx >= 0) {
      agg = messages[static_cast<std::size_t>(override_idx)].weights;
    } else {
      auto a = aggregate(messages, healths);
      agg = std::move(a.weights);
      rec.fallback = a.fallback;
    }

    BroadcastMessage b;
    b.agg_weights = agg;
    b.mean_geo = consensus_geo(messages);
    b.consensus_regime = consensus_regime(messages, healths);
    b.health = healths;
    b.circuit_breaker = override_idx >= 0;
    b.round = r;

    bool stop = false;
    if (broadcast) {
      const double d = l2_distance(agg, broadcast->agg_weights);
      rec.aggregate_delta = d;
      out.deltas.push_back(d);
      if (override_idx < 0 && d < cfg.eps) {
        out.converged = true;
        stop = true;
      }
    } else {
      out.opening_delta = l2_distance(agg, ctx.holdings);
    }
    if (override_idx >= 0) {
      out.override_fired = true;
      out.override_agent = override_idx;
      stop = true;
    }

    rec.messages = messages;
    rec.broadcast = b;
    out.rounds.push_back(std::move(rec));
    out.final_weights = agg;
    broadcast = std::move(b);
    previous = std::move(messages);
    if (stop) break;
  }
  return out;
}

HealthTracker::HealthTracker(std::size_t agents, const StrategyConfig& cfg)
    : agents_(agents), cfg_(cfg), history_(agents), stability_(agents, 1.0), latency_(agents, 0.0) {}

std::vector<HealthInputs> HealthTracker::inputs(const Matrix& log_returns) const {
  std::vector<HealthInputs> out(agents_);
  const Eigen::Index rows = log_returns.rows();
  const Eigen::Index window = std::min<Eigen::Index>(rows, cfg_.health_window);
  const Eigen::Index first = rows - window;
  for (std::size_t i = 0; i < agents_; ++i) {
    auto& h = out[i];
    h.stability = stability_[i];
    h.latency = latency_[i];
    h.accuracy = 0.5;
    h.risk_adj_profit = 0.5;
    const auto& hist = history_[i];
    if (hist.empty()) continue;

    double hits = 0.0, sum = 0.0, sum_sq = 0.0;
    int count = 0;
    std::size_t p = 0;
    for (Eigen::Index j = first; j < rows; ++j) {
      // Proposal decided at price row d applies to the return into row d + 1.
      while (p + 1 < hist.size() && hist[p + 1].day <= j) ++p;
      if (hist[p].day > j) continue;
      const Vector& w = hist[p].weights;
      const Vector simple = (log_returns.row(j).array().exp() - 1.0).matrix().transpose();
      const double active = (w.array() - 1.0 / static_cast<double>(w.size())).matrix().dot(simple);
      hits += active > 0.0 ? 1.0 : (active == 0.0 ? 0.5 : 0.0);
      const double r = w.dot(simple);
      sum += r;
      sum_sq += r * r;
      ++count;
    }
    if (count < 2) continue;
    h.accuracy = hits / count;
    const double mean = sum / count;
    const double var = std::max(0.0, (sum_sq - count * mean * mean) / (count - 1));
    const double sharpe = var > 0.0 ? mean / std::sqrt(var) * std::sqrt(252.0) : 0.0;
    h.risk_adj_profit = 1.0 / (1.0 + std::exp(-sharpe));
  }
  return out;
}

std::vector<double> HealthTracker::healths(const Matrix& log_returns) const {
  std::vector<double> out(agents_, cfg_.health_init);
  bool any_history = false;
  for (const auto& h : history_) any_history = any_history || !h.empty();
  if (!any_history) return out;
  const HealthWeights w{cfg_.health_alpha, cfg_.health_beta, cfg_.health_gamma, cfg_.health_delta};
  const auto in = inputs(log_returns);
  for (std::size_t i = 0; i < agents_; ++i) out[i] = health_score(in[i], w);
  return out;
}

void HealthTracker::record(const CoordinationOutcome& outcome, long day) {
  if (outcome.rounds.empty()) return;
  if (outcome.agent_names.size() != agents_) throw Error("HealthTracker: agent count mismatch");
  const auto& last = outcome.rounds.back().messages;
  for (std::size_t i = 0; i < agents_; ++i) {
    const Vector& w = last[i].weights.values();
    if (!history_[i].empty()) {
      stability_[i] = std::clamp(1.0 - (w - history_[i].back().weights).norm() / std::sqrt(2.0), 0.0, 1.0);
    }
    history_[i].push_back({day, w});
    int needed = 1;
    for (const auto& rec : outcome.rounds) {
      if (rec.round > 1 && rec.messages[i].delta >= cfg_.eps) needed = rec.round;
    }
    latency_[i] = static_cast<double>(needed) / static_cast<double>(cfg_.r_max);
  }
}

}  // namespace rmats
