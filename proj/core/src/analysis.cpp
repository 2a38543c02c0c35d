#include "rmats/analysis.hpp"

#include "rmats/error.hpp"
#include "rmats/report.hpp"
#include "rmats/sentiment.hpp"

#include <algorithm>
#include <cmath>

namespace rmats {

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double logit(double p) {
  const double c = std::clamp(p, 1e-6, 1.0 - 1e-6);
  return std::log(c / (1.0 - c));
}

}  // namespace

Matrix regime_observations(const Matrix& returns, int vol_window) {
  const Eigen::Index T = returns.rows();
  const Eigen::Index w = vol_window;
  if (T < w) throw Error("insufficient history");
  Vector mean = returns.rowwise().mean();
  Vector disp(T);
  for (Eigen::Index t = 0; t < T; ++t) {
    disp[t] = std::sqrt((returns.row(t).array() - mean[t]).square().mean());
  }
  Matrix obs(T - w + 1, 2);
  double rolling = disp.head(w).sum();
  for (Eigen::Index t = w - 1; t < T; ++t) {
    if (t >= w) rolling += disp[t] - disp[t - w];
    obs(t - w + 1, 0) = mean[t];
    obs(t - w + 1, 1) = rolling / static_cast<double>(w);
  }
  return obs;
}

Regime most_likely_regime(const std::array<double, 3>& p) {
  Regime best = Regime::Stress;
  for (Regime r : {Regime::Bear, Regime::Bull}) {
    if (p[static_cast<std::size_t>(r)] > p[static_cast<std::size_t>(best)]) best = r;
  }
  return best;
}

Weights regime_template(const AssetUniverse& universe, const StrategyConfig& cfg, Regime r) {
  switch (r) {
    case Regime::Bull: return universe.from_group_fractions(cfg.template_bull);
    case Regime::Bear: return universe.from_group_fractions(cfg.template_bear);
    case Regime::Stress: return universe.from_group_fractions(cfg.template_stress);
  }
  throw Error("regime_template: invalid regime");
}

AgentMessage analysis_propose(const MarketContext& ctx, const BroadcastMessage* prior, const RegimeView& view,
                              const AgentMessage* previous) {
  const Regime regime = most_likely_regime(view.regime_probability);
  const Weights base = regime_template(ctx.universe, ctx.config, regime);

  AgentMessage m;
  if (prior != nullptr) {
    if (prior->agg_weights.size() != base.size()) throw Error("analysis_propose: broadcast weight length mismatch");
    const double b = ctx.config.analysis_blend;
    m.weights = Weights((1.0 - b) * base.values() + b * prior->agg_weights.values());
  } else {
    m.weights = base;
  }
  m.confidence = std::clamp(view.regime_probability[static_cast<std::size_t>(regime)], 0.0, 1.0);
  m.geo_risk = logistic(view.fused_signal);
  m.regime = regime;
  stamp_message(m, ctx, previous);
  return m;
}

void AnalysisAgent::prepare(const MarketContext& ctx) {
  const auto& cfg = ctx.config;
  if (ctx.history() < 252) throw Error("insufficient history");
  const Eigen::Index rows = ctx.returns.rows();
  const Eigen::Index window = std::min<Eigen::Index>(rows, cfg.hmm_window);
  const Matrix obs = regime_observations(ctx.returns.bottomRows(window), cfg.hmm_vol_window);
  const HmmFit fit = hmm_fit(obs, 3, cfg.seed, cfg.hmm_max_iter, cfg.hmm_tol);
  const Matrix post = regime_posterior(fit.model, obs);
  const auto labels = regime_label(fit.model);

  RegimeView view;
  for (int k = 0; k < 3; ++k) {
    view.regime_probability[static_cast<std::size_t>(labels[static_cast<std::size_t>(k)])] += post(post.rows() - 1, k);
  }

  // Three risk readings on a common logit scale: the geo-risk proxy, the
  // factor model's defensive-minus-equity preference, and the regime model.
  const double sentiment_signal = logit(context_geo_risk(ctx));
  const Vector composite = factor_scores(ctx.prices).composite();
  double def = 0.0, eq = 0.0;
  int nd = 0, ne = 0;
  for (std::size_t i = 0; i < ctx.n(); ++i) {
    if (ctx.universe.defensive[i]) {
      def += composite[static_cast<Eigen::Index>(i)];
      ++nd;
    } else if (ctx.universe.is_equity(i)) {
      eq += composite[static_cast<Eigen::Index>(i)];
      ++ne;
    }
  }
  const double report_signal = (nd > 0 && ne > 0) ? def / nd - eq / ne : 0.0;
  const double regime_signal = logit(view.regime_probability[static_cast<std::size_t>(Regime::Stress)] +
                                     0.5 * view.regime_probability[static_cast<std::size_t>(Regime::Bear)]);

  if (!kalman_ready_) {
    kalman_.z = 0.0;
    kalman_.p = 1.0;
    kalman_.q = cfg.kalman_q;
    kalman_.r_obs.assign(3, cfg.kalman_r);
    kalman_ready_ = true;
  }
  const std::array<double, 3> readings{sentiment_signal, report_signal, regime_signal};
  kalman_ = kalman_fuse(kalman_, readings);
  view.fused_signal = kalman_.z;
  view_ = view;
  view_day_ = ctx.day;
}

void AnalysisAgent::begin_rebalance(const MarketContext& ctx) {
  if (!view_ || view_day_ != ctx.day) prepare(ctx);
}

AgentMessage AnalysisAgent::propose(const MarketContext& ctx, const BroadcastMessage* prior,
                                    const AgentMessage* previous) {
  if (!view_ || view_day_ != ctx.day) prepare(ctx);
  return analysis_propose(ctx, prior, *view_, previous);
}

}  // namespace rmats
