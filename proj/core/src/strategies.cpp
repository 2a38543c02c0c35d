#include "rmats/analysis.hpp"
#include "rmats/backtest.hpp"
#include "rmats/error.hpp"
#include "rmats/optimizer.hpp"
#include "rmats/report.hpp"
#include "rmats/risk.hpp"
#include "rmats/sentiment.hpp"

#include <algorithm>
#include <future>

namespace rmats {

namespace {

class EqualWeightStrategy final : public Strategy {
 public:
  std::string name() const override { return "equal_weight"; }
  Decision decide(MarketContext& ctx) override { return {Weights::uniform(ctx.n()), std::nullopt}; }
};

class MvoStrategy final : public Strategy {
 public:
  explicit MvoStrategy(const StrategyConfig& cfg) : cfg_(cfg) {}
  std::string name() const override { return "mvo"; }
  Decision decide(MarketContext& ctx) override {
    const auto rows = ctx.returns.rows();
    const Matrix sigma = ewma_covariance(ctx.returns.bottomRows(std::min<Eigen::Index>(rows, cfg_.ewma_window)),
                                         cfg_.ewma_decay);
    const ExpectedReturns mu = estimate_mu(ctx.returns, cfg_.mu_window, cfg_.mu_shrink);
    OptConstraints cons = make_constraints(ctx.universe, cfg_, false, 0.0);
    if (!cfg_.mvo_lambda_grid.empty()) {
      const Matrix window = ctx.returns.bottomRows(std::min<Eigen::Index>(rows, 252));
      cons.risk_aversion = select_risk_aversion(window, cfg_.mvo_lambda_grid, cons,
                                                RewardParams{cfg_.lambda1, cfg_.lambda2, cfg_.theta}, cfg_);
    }
    return {optimize(mu, sigma, cons, make_settings(cfg_)), std::nullopt};
  }

 private:
  StrategyConfig cfg_;
};

class MultifactorStrategy final : public Strategy {
 public:
  std::string name() const override { return "multifactor"; }
  Decision decide(MarketContext& ctx) override { return {report_propose(ctx, nullptr).weights, std::nullopt}; }
};

class SentimentProxyStrategy final : public Strategy {
 public:
  std::string name() const override { return "sentiment_proxy"; }
  Decision decide(MarketContext& ctx) override { return {sentiment_propose(ctx, nullptr).weights, std::nullopt}; }
};

class RmatsStrategy final : public Strategy {
 public:
  RmatsStrategy(const StrategyConfig& cfg, AgentSelection sel) : cfg_(cfg) {
    if (sel.sentiment) agents_.push_back(std::make_unique<SentimentAgent>());
    if (sel.report) agents_.push_back(std::make_unique<ReportAgent>());
    if (sel.analysis) agents_.push_back(std::make_unique<AnalysisAgent>());
    if (sel.risk) agents_.push_back(std::make_unique<RiskAgent>());
    if (agents_.empty()) throw ValidationError("rmats: at least one agent is required");
    tracker_.emplace(agents_.size(), cfg_);
  }
  std::string name() const override { return "rmats"; }
  Decision decide(MarketContext& ctx) override {
    if (!geo_history_.empty()) {
      double s = 0.0;
      for (double g : geo_history_) s += g;
      ctx.trailing_geo = s / static_cast<double>(geo_history_.size());
    }
    std::vector<Agent*> ptrs;
    for (auto& a : agents_) ptrs.push_back(a.get());
    CoordinationOutcome outcome = coordinate(ctx, ptrs, tracker_->healths(ctx.returns), cfg_);
    tracker_->record(outcome, ctx.day);
    geo_history_.push_back(outcome.rounds.back().broadcast.mean_geo);
    Weights w = outcome.final_weights;
    return {std::move(w), std::move(outcome)};
  }

 private:
  StrategyConfig cfg_;
  std::vector<std::unique_ptr<Agent>> agents_;
  std::optional<HealthTracker> tracker_;
  std::vector<double> geo_history_;
};

struct Variant {
  StrategyConfig cfg;
  AgentSelection agents;
};

Variant variant_config(const StrategyConfig& base, std::string_view name) {
  Variant v{base, {}};
  if (name == "full") return v;
  if (name == "no_recursion") v.cfg.r_max = 1;
  else if (name == "no_sentiment") v.agents.sentiment = false;
  else if (name == "no_risk") v.agents.risk = false;
  else if (name == "no_analysis") v.agents.analysis = false;
  else if (name == "no_did") v.cfg.grs_c = 0.0;
  else throw ValidationError("unknown ablation variant '" + std::string(name) + "'");
  return v;
}

}  // namespace

const std::vector<std::string>& strategy_names() {
  static const std::vector<std::string> names{"rmats", "mvo", "multifactor", "sentiment_proxy", "equal_weight"};
  return names;
}

std::unique_ptr<Strategy> make_rmats(const StrategyConfig& cfg, AgentSelection agents) {
  return std::make_unique<RmatsStrategy>(cfg, agents);
}

std::unique_ptr<Strategy> make_strategy(std::string_view name, const StrategyConfig& cfg) {
  if (name == "rmats") return make_rmats(cfg);
  if (name == "mvo") return std::make_unique<MvoStrategy>(cfg);
  if (name == "multifactor") return std::make_unique<MultifactorStrategy>();
  if (name == "sentiment_proxy") return std::make_unique<SentimentProxyStrategy>();
  if (name == "equal_weight") return std::make_unique<EqualWeightStrategy>();
  throw ValidationError("unknown strategy '" + std::string(name) + "'");
}

const std::vector<std::string>& ablation_variants() {
  static const std::vector<std::string> names{"full", "no_recursion", "no_sentiment", "no_risk", "no_analysis", "no_did"};
  return names;
}

std::vector<AblationRow> run_ablation(const PriceTable& prices, const StrategyConfig& cfg,
                                      const std::vector<std::string>& variants,
                                      const std::vector<EventWindow>& events) {
  std::vector<Variant> configs;
  for (const auto& name : variants) configs.push_back(variant_config(cfg, name));

  std::vector<std::future<AblationRow>> jobs;
  for (std::size_t i = 0; i < variants.size(); ++i) {
    jobs.push_back(std::async(std::launch::async, [&, i] {
      const Variant& v = configs[i];
      auto strategy = make_rmats(v.cfg, v.agents);
      AblationRow row;
      row.variant = variants[i];
      row.result = run_backtest(*strategy, prices, v.cfg, events);
      row.metrics = performance_metrics(row.result, v.cfg);
      row.avg_edd = event_window_returns(row.result, events).avg_edd;
      for (const auto& rb : row.result.rebalances) {
        if (rb.coordination) row.max_rounds = std::max(row.max_rounds, rb.coordination->rounds_used);
      }
      return row;
    }));
  }
  std::vector<AblationRow> rows;
  for (auto& j : jobs) rows.push_back(j.get());
  return rows;
}

}  // namespace rmats
