#include "rmats/report.hpp"

#include "rmats/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rmats {

Vector zscore(const Vector& raw) {
  if (raw.size() == 0) return raw;
  // Spread at rounding level counts as a constant cross-section.
  const double spread = raw.maxCoeff() - raw.minCoeff();
  if (!(spread > 1e-12 * std::max(1.0, raw.cwiseAbs().maxCoeff()))) return Vector::Zero(raw.size());
  const double mu = raw.mean();
  const double sd = std::sqrt((raw.array() - mu).square().mean());
  return ((raw.array() - mu) / sd).matrix();
}

FactorPanel factor_scores(const PriceTable& p) {
  if (p.rows() < static_cast<std::size_t>(kMomentumWindow + 1)) throw Error("insufficient history");
  const Matrix logp = p.prices.array().log().matrix();
  if (!logp.allFinite() || (p.prices.array() <= 0.0).any()) throw Error("invalid price");
  const Eigen::Index last = logp.rows() - 1;
  const Eigen::Index n = logp.cols();

  const Vector momentum = (logp.row(last) - logp.row(last - kMomentumWindow)).transpose();
  const Vector reversal = (logp.row(last) - logp.row(last - kReversalWindow)).transpose();
  // Last 63 daily log returns.
  const Matrix r = logp.bottomRows(kVolWindow) - logp.middleRows(last - kVolWindow, kVolWindow);
  Vector vol(n), sharpe(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double mu = r.col(j).mean();
    const double var = (r.col(j).array() - mu).square().sum() / static_cast<double>(kVolWindow - 1);
    const double sd = std::sqrt(var);
    vol[j] = sd;
    sharpe[j] = sd > 0.0 ? mu / sd : 0.0;
  }
  FactorPanel f;
  f.momentum = zscore(momentum);
  f.low_vol = zscore(-vol);
  f.mean_rev = zscore(-reversal);
  f.roll_sharpe = zscore(sharpe);
  return f;
}

Weights softmax_weights(const Vector& scores, double temperature) {
  if (scores.size() == 0) throw Error("empty input");
  const Vector scaled = scores / temperature;
  const double m = scaled.maxCoeff();
  Vector e = (scaled.array() - m).exp().matrix();
  e /= e.sum();
  return project_to_simplex(e);
}

namespace {

Vector ranks(const Vector& x) {
  const auto n = static_cast<std::size_t>(x.size());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[static_cast<Eigen::Index>(a)] < x[static_cast<Eigen::Index>(b)];
  });
  Vector out(x.size());
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && x[static_cast<Eigen::Index>(order[j + 1])] == x[static_cast<Eigen::Index>(order[i])]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) out[static_cast<Eigen::Index>(order[k])] = avg;
    i = j + 1;
  }
  return out;
}

}  // namespace

double rank_correlation(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw Error("rank_correlation: length mismatch");
  if (a.size() < 2) return 0.0;
  const Vector ra = ranks(a);
  const Vector rb = ranks(b);
  const Vector da = ra.array() - ra.mean();
  const Vector db = rb.array() - rb.mean();
  const double denom = std::sqrt(da.squaredNorm() * db.squaredNorm());
  return denom > 0.0 ? da.dot(db) / denom : 0.0;
}

AgentMessage report_propose(const MarketContext& ctx, const BroadcastMessage* prior, const AgentMessage* previous) {
  const auto& cfg = ctx.config;
  const FactorPanel f = factor_scores(ctx.prices);
  const Vector composite = f.composite();

  const auto last = static_cast<Eigen::Index>(ctx.prices.rows()) - 1;
  const Eigen::Index back = std::min<Eigen::Index>(cfg.report_conf_window, last);
  const Vector realized =
      (ctx.prices.prices.row(last).array().log() - ctx.prices.prices.row(last - back).array().log()).transpose();

  AgentMessage m;
  m.weights = softmax_weights(composite, cfg.report_temperature);
  m.confidence = std::clamp(rank_correlation(composite, realized), cfg.report_conf_min, cfg.report_conf_max);
  m.geo_risk = 0.5;
  m.regime = prior != nullptr ? prior->consensus_regime : Regime::Bull;
  stamp_message(m, ctx, previous);
  return m;
}

void ReportAgent::begin_rebalance(const MarketContext&) { cached_.reset(); }

AgentMessage ReportAgent::propose(const MarketContext& ctx, const BroadcastMessage* prior,
                                  const AgentMessage* previous) {
  if (!cached_) cached_ = report_propose(ctx, nullptr, nullptr);
  AgentMessage m = *cached_;
  m.regime = prior != nullptr ? prior->consensus_regime : Regime::Bull;
  stamp_message(m, ctx, previous);
  return m;
}

}  // namespace rmats
