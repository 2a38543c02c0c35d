#include "rmats/sentiment.hpp"

#include "rmats/error.hpp"

#include <algorithm>
#include <cmath>

namespace rmats {

DiDResult did_estimate(const PanelData& panel) {
  const auto units = static_cast<std::size_t>(panel.outcomes.rows());
  const auto periods = static_cast<std::size_t>(panel.outcomes.cols());
  if (panel.treated.size() != units || panel.post.size() != periods) {
    throw Error("did_estimate: indicator lengths do not match the outcome matrix");
  }
  // cell[d][p]: sums and counts for treated flag d and post flag p.
  double sum[2][2] = {{0, 0}, {0, 0}};
  double count[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t i = 0; i < units; ++i) {
    const int d = panel.treated[i] ? 1 : 0;
    for (std::size_t t = 0; t < periods; ++t) {
      const int p = panel.post[t] ? 1 : 0;
      sum[d][p] += panel.outcomes(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t));
      count[d][p] += 1.0;
    }
  }
  for (int d = 0; d < 2; ++d) {
    for (int p = 0; p < 2; ++p) {
      if (count[d][p] == 0.0) throw Error("degenerate panel");
    }
  }
  double mean[2][2];
  for (int d = 0; d < 2; ++d) {
    for (int p = 0; p < 2; ++p) mean[d][p] = sum[d][p] / count[d][p];
  }
  DiDResult r;
  r.alpha = mean[0][0];
  r.beta = mean[1][0] - mean[0][0];
  r.gamma = mean[0][1] - mean[0][0];
  r.delta = (mean[1][1] - mean[1][0]) - (mean[0][1] - mean[0][0]);

  // Residuals of the saturated model are deviations from cell means; the
  // interaction's OLS variance is sigma^2 * sum of inverse cell counts.
  double rss = 0.0;
  for (std::size_t i = 0; i < units; ++i) {
    const int d = panel.treated[i] ? 1 : 0;
    for (std::size_t t = 0; t < periods; ++t) {
      const int p = panel.post[t] ? 1 : 0;
      const double e = panel.outcomes(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) - mean[d][p];
      rss += e * e;
    }
  }
  const double dof = static_cast<double>(units * periods) - 4.0;
  if (dof > 0.0) {
    const double sigma2 = rss / dof;
    double inv = 0.0;
    for (int d = 0; d < 2; ++d) {
      for (int p = 0; p < 2; ++p) inv += 1.0 / count[d][p];
    }
    r.delta_se = std::sqrt(sigma2 * inv);
  }
  return r;
}

std::optional<PanelData> event_panel(const Matrix& returns, std::size_t onset_return_row, int window) {
  const auto w = static_cast<std::size_t>(window);
  if (onset_return_row < w || onset_return_row >= static_cast<std::size_t>(returns.rows())) return std::nullopt;
  const auto units = returns.cols();
  const auto begin = static_cast<Eigen::Index>(onset_return_row - w);
  const auto periods = returns.rows() - begin;

  Vector trailing = returns.middleRows(begin, static_cast<Eigen::Index>(w)).colwise().sum().transpose();
  std::vector<double> sorted(trailing.data(), trailing.data() + trailing.size());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size();
  const double median = (m % 2 == 1) ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);

  PanelData panel;
  panel.outcomes = 100.0 * returns.middleRows(begin, periods).transpose();
  panel.treated.resize(static_cast<std::size_t>(units));
  std::size_t treated = 0;
  for (Eigen::Index i = 0; i < units; ++i) {
    panel.treated[static_cast<std::size_t>(i)] = trailing[i] < median;
    treated += trailing[i] < median ? 1 : 0;
  }
  if (treated == 0 || treated == static_cast<std::size_t>(units)) return std::nullopt;
  panel.post.resize(static_cast<std::size_t>(periods));
  for (Eigen::Index t = 0; t < periods; ++t) panel.post[static_cast<std::size_t>(t)] = t >= static_cast<Eigen::Index>(w);
  return panel;
}

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double mean_of(const std::vector<double>& x, std::size_t begin, std::size_t end) {
  double s = 0.0;
  for (std::size_t i = begin; i < end; ++i) s += x[i];
  return s / static_cast<double>(end - begin);
}

double stdev_of(const std::vector<double>& x, std::size_t begin, std::size_t end) {
  const double mu = mean_of(x, begin, end);
  double s = 0.0;
  for (std::size_t i = begin; i < end; ++i) s += (x[i] - mu) * (x[i] - mu);
  return std::sqrt(s / static_cast<double>(end - begin));
}

}  // namespace

GrsComponents geo_risk_components(const Matrix& returns, const AssetUniverse& universe, int window, int lookback) {
  const auto rows = static_cast<std::size_t>(returns.rows());
  if (rows < 10) throw Error("insufficient history");
  if (static_cast<std::size_t>(returns.cols()) != universe.size()) {
    throw Error("geo_risk_components: return columns do not match universe");
  }
  std::vector<std::size_t> defensive, equity;
  for (std::size_t i = 0; i < universe.size(); ++i) {
    if (universe.defensive[i]) defensive.push_back(i);
    else if (universe.is_equity(i)) equity.push_back(i);
  }
  std::vector<double> spread(rows, 0.0), disp(rows, 0.0);
  for (std::size_t t = 0; t < rows; ++t) {
    const auto row = returns.row(static_cast<Eigen::Index>(t));
    if (!defensive.empty() && !equity.empty()) {
      double d = 0.0, e = 0.0;
      for (auto i : defensive) d += row[static_cast<Eigen::Index>(i)];
      for (auto i : equity) e += row[static_cast<Eigen::Index>(i)];
      spread[t] = d / static_cast<double>(defensive.size()) - e / static_cast<double>(equity.size());
    }
    const double mu = row.mean();
    disp[t] = std::sqrt((row.array() - mu).square().mean());
  }
  const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(window), rows);
  const std::size_t win_begin = rows - w;
  const std::size_t ref_len = std::min<std::size_t>(static_cast<std::size_t>(lookback), win_begin);
  GrsComponents z;
  if (ref_len < 2) return z;
  const std::size_t ref_begin = win_begin - ref_len;
  const double sd_s = stdev_of(spread, ref_begin, win_begin);
  const double sd_v = stdev_of(disp, ref_begin, win_begin);
  if (sd_s > 0.0) {
    z.z_spread = (mean_of(spread, win_begin, rows) - mean_of(spread, ref_begin, win_begin)) *
                 std::sqrt(static_cast<double>(w)) / sd_s;
  }
  if (sd_v > 0.0) {
    z.z_vol = (mean_of(disp, win_begin, rows) - mean_of(disp, ref_begin, win_begin)) / sd_v;
  }
  return z;
}

double geo_risk_from_components(const GrsComponents& z, bool event_active, const std::optional<DiDResult>& did,
                                const GrsCoefficients& coef) {
  double x = coef.a * z.z_spread + coef.b * z.z_vol;
  if (event_active && did) x += coef.c * std::abs(did->delta);
  return logistic(x);
}

double geo_risk_score(const Matrix& returns, const AssetUniverse& universe, bool event_active,
                      const std::optional<DiDResult>& did, const StrategyConfig& cfg) {
  const auto z = geo_risk_components(returns, universe, cfg.grs_window, cfg.grs_lookback);
  return geo_risk_from_components(z, event_active, did, GrsCoefficients{cfg.grs_a, cfg.grs_b, cfg.grs_c});
}

std::optional<DiDResult> context_did(const MarketContext& ctx) {
  if (!ctx.event_active || !ctx.event_onset_row || *ctx.event_onset_row == 0) return std::nullopt;
  // Price row k is reached by return row k - 1.
  auto panel = event_panel(ctx.returns, *ctx.event_onset_row - 1, ctx.config.did_window);
  if (!panel) return std::nullopt;
  return did_estimate(*panel);
}

double context_geo_risk(const MarketContext& ctx) {
  return geo_risk_score(ctx.returns, ctx.universe, ctx.event_active, context_did(ctx), ctx.config);
}

AgentMessage sentiment_propose(const MarketContext& ctx, const BroadcastMessage* /*prior*/,
                               const AgentMessage* previous) {
  if (ctx.history() < 60) throw Error("insufficient history");
  const auto& cfg = ctx.config;
  const double g = context_geo_risk(ctx);
  const Weights neutral = Weights::uniform(ctx.n());
  const Weights defensive = ctx.universe.defensive_basket();

  AgentMessage m;
  m.weights = Weights((1.0 - g) * neutral.values() + g * defensive.values());
  m.geo_risk = g;
  m.confidence = cfg.sentiment_conf_min + (cfg.sentiment_conf_max - cfg.sentiment_conf_min) * std::abs(2.0 * g - 1.0);
  m.regime = g > cfg.sentiment_stress ? Regime::Stress : (g > cfg.sentiment_bear ? Regime::Bear : Regime::Bull);
  stamp_message(m, ctx, previous);
  return m;
}

void SentimentAgent::begin_rebalance(const MarketContext&) { cached_.reset(); }

AgentMessage SentimentAgent::propose(const MarketContext& ctx, const BroadcastMessage* prior,
                                     const AgentMessage* previous) {
  // The proposal depends only on market data, so later rounds reuse round 1.
  if (!cached_) cached_ = sentiment_propose(ctx, prior, nullptr);
  AgentMessage m = *cached_;
  stamp_message(m, ctx, previous);
  return m;
}

}  // namespace rmats
