#include "rmats/risk.hpp"

#include "rmats/csv.hpp"
#include "rmats/error.hpp"
#include "rmats/sentiment.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

namespace rmats {

Matrix ewma_covariance(const Matrix& returns, double decay) {
  if (returns.rows() < kCovInitRows) throw Error("ewma_covariance: need at least 30 rows");
  if (!(decay > 0.0 && decay < 1.0)) throw Error("ewma_covariance: decay must lie in (0,1)");
  if (!returns.allFinite()) throw Error("ewma_covariance: non-finite returns");
  const Eigen::Index n = returns.cols();
  const Matrix head = returns.topRows(kCovInitRows);
  const Matrix centered = head.rowwise() - head.colwise().mean();
  Matrix sigma = (centered.transpose() * centered) / static_cast<double>(kCovInitRows - 1);
  for (Eigen::Index t = kCovInitRows; t < returns.rows(); ++t) {
    const Vector r = returns.row(t).transpose();
    sigma = decay * sigma + (1.0 - decay) * (r * r.transpose());
  }
  sigma = 0.5 * (sigma + sigma.transpose());
  sigma += kCovRidge * Matrix::Identity(n, n);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-10) throw Error("ewma_covariance: not positive semi-definite");
  return sigma;
}

TailRisk historical_cvar(const std::vector<double>& pnl, double alpha) {
  if (pnl.size() < 50) throw Error("historical_cvar: need at least 50 observations");
  if (!(alpha > 0.5 && alpha < 1.0)) throw Error("historical_cvar: alpha must lie in (0.5,1)");
  std::vector<double> sorted = pnl;
  for (double x : sorted) {
    if (!std::isfinite(x)) throw Error("historical_cvar: non-finite return");
  }
  std::sort(sorted.begin(), sorted.end());
  const auto idx = static_cast<std::size_t>(std::floor((1.0 - alpha) * static_cast<double>(sorted.size() - 1) + 1e-9));
  double sum = 0.0;
  for (std::size_t i = 0; i <= idx; ++i) sum += sorted[i];
  TailRisk out;
  out.alpha = alpha;
  out.var = -sorted[idx];
  out.cvar = -sum / static_cast<double>(idx + 1);
  return out;
}

bool circuit_breaker(double dd, double grs, double vol, const RiskThresholds& th) {
  return dd > th.theta_dd || grs > th.theta_geo || vol > th.theta_vol;
}

std::vector<double> stress_test(const Weights& w, const std::vector<Scenario>& scenarios) {
  std::vector<double> losses;
  losses.reserve(scenarios.size());
  for (const auto& s : scenarios) {
    if (s.shock.size() != w.values().size()) throw Error("stress_test: scenario '" + s.name + "' length mismatch");
    losses.push_back(-w.values().dot(s.shock));
  }
  return losses;
}

std::vector<Scenario> read_scenarios(std::istream& in, const std::vector<std::string>& tickers,
                                     std::string_view source) {
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw ValidationError(std::string(source) + ": line " + std::to_string(line_no) + ": " + what);
  };
  std::vector<int> column_of;  // file column -> ticker index
  std::vector<Scenario> out;
  while (std::getline(in, line)) {
    ++line_no;
    csv::normalize_line(line, line_no == 1);
    if (csv::trim(line).empty()) continue;
    const auto fields = csv::split(line);
    if (column_of.empty()) {
      if (fields.empty() || csv::trim(fields[0]) != "scenario") fail("expected header starting with 'scenario'");
      std::set<std::size_t> seen;
      for (std::size_t c = 1; c < fields.size(); ++c) {
        const auto name = csv::trim(fields[c]);
        const auto it = std::find(tickers.begin(), tickers.end(), name);
        if (it == tickers.end()) {
          column_of.push_back(-1);
          continue;
        }
        const auto idx = static_cast<std::size_t>(it - tickers.begin());
        if (!seen.insert(idx).second) fail("duplicate ticker '" + std::string(name) + "'");
        column_of.push_back(static_cast<int>(idx));
      }
      if (seen.size() != tickers.size()) {
        for (const auto& t : tickers) {
          if (std::find_if(fields.begin() + 1, fields.end(), [&](const std::string& f) { return csv::trim(f) == t; }) ==
              fields.end()) {
            fail("missing ticker '" + t + "'");
          }
        }
      }
      column_of.insert(column_of.begin(), -2);
      continue;
    }
    if (fields.size() != column_of.size()) {
      fail("expected " + std::to_string(column_of.size()) + " fields, found " + std::to_string(fields.size()));
    }
    Scenario s;
    s.name = std::string(csv::trim(fields[0]));
    s.shock = Vector::Zero(static_cast<Eigen::Index>(tickers.size()));
    for (std::size_t c = 1; c < fields.size(); ++c) {
      const auto v = csv::to_double(csv::trim(fields[c]));
      if (!v) fail("unparseable shock '" + fields[c] + "' in column " + std::to_string(c + 1));
      if (column_of[c] >= 0) s.shock[column_of[c]] = *v;
    }
    out.push_back(std::move(s));
  }
  if (column_of.empty()) throw ValidationError(std::string(source) + ": empty scenario file");
  return out;
}

std::vector<Scenario> load_scenarios(const std::filesystem::path& path, const std::vector<std::string>& tickers) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scenario file " + path.string());
  return read_scenarios(in, tickers, path.string());
}

void write_scenarios(std::ostream& out, const std::vector<std::string>& tickers, const std::vector<Scenario>& s) {
  out << "scenario";
  for (const auto& t : tickers) out << ',' << t;
  out << '\n';
  for (const auto& sc : s) {
    out << sc.name;
    for (Eigen::Index i = 0; i < sc.shock.size(); ++i) out << ',' << format_number(sc.shock[i]);
    out << '\n';
  }
}

std::vector<Scenario> calibrate_scenarios(const PriceTable& prices, const std::vector<EventWindow>& events) {
  constexpr std::size_t kSpan = 5;
  std::vector<Scenario> out;
  for (const auto& e : events) {
    const std::size_t first = prices.lower_bound(e.start);
    std::size_t last = first;
    while (last < prices.rows() && !(e.end < prices.dates[last])) ++last;
    if (last < first + kSpan + 1) continue;
    std::size_t best = first;
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t k = first; k + kSpan < last; ++k) {
      const Vector move = (prices.prices.row(static_cast<Eigen::Index>(k + kSpan)).array() /
                               prices.prices.row(static_cast<Eigen::Index>(k)).array() -
                           1.0)
                              .matrix()
                              .transpose();
      if (move.mean() < worst) {
        worst = move.mean();
        best = k;
      }
    }
    Scenario s;
    s.name = e.name;
    s.shock = (prices.prices.row(static_cast<Eigen::Index>(best + kSpan)).array() /
                   prices.prices.row(static_cast<Eigen::Index>(best)).array() -
               1.0)
                  .matrix()
                  .transpose();
    out.push_back(std::move(s));
  }
  return out;
}

Weights min_variance(const Matrix& sigma, const OptConstraints& cons, const OptimizerSettings& settings) {
  return optimize(ExpectedReturns{Vector::Zero(sigma.rows())}, sigma, cons, settings);
}

RiskView risk_view(const MarketContext& ctx) {
  const auto& cfg = ctx.config;
  const auto rows = ctx.returns.rows();
  if (rows < std::max<Eigen::Index>(kCovInitRows, 50)) throw Error("risk: insufficient history");
  RiskView v;
  v.sigma = ewma_covariance(ctx.returns.bottomRows(std::min<Eigen::Index>(rows, cfg.ewma_window)), cfg.ewma_decay);
  v.grs = context_geo_risk(ctx);
  const Vector& h = ctx.holdings.values();
  v.portfolio_vol = std::sqrt(252.0 * std::max(0.0, h.dot(v.sigma * h)));
  const Vector ew = Weights::uniform(ctx.n()).values();
  v.universe_vol = std::sqrt(252.0 * std::max(0.0, ew.dot(v.sigma * ew)));
  const RiskThresholds th{cfg.theta_dd, cfg.theta_geo * (1.0 - cfg.geo_adapt * ctx.trailing_geo), cfg.theta_vol};
  v.breaker = circuit_breaker(std::max(0.0, ctx.drawdown), v.grs, v.portfolio_vol, th);
  return v;
}

AgentMessage risk_propose(const MarketContext& ctx, const BroadcastMessage* prior, const RiskView& view,
                          const AgentMessage* previous) {
  const auto& cfg = ctx.config;
  AgentMessage m;
  m.geo_risk = view.grs;
  if (view.breaker) {
    m.weights = ctx.universe.defensive_basket();
    m.confidence = 1.0;
    m.circuit_breaker = true;
    m.regime = Regime::Stress;
    stamp_message(m, ctx, previous);
    return m;
  }
  const double mean_geo = prior ? prior->mean_geo : view.grs;
  const OptConstraints cons = make_constraints(ctx.universe, cfg, true, mean_geo);
  m.weights = min_variance(view.sigma, cons, make_settings(cfg));

  const auto rows = ctx.returns.rows();
  const Eigen::Index window = std::min<Eigen::Index>(rows, cfg.cvar_window);
  const Vector pnl = (ctx.returns.bottomRows(window).array().exp() - 1.0).matrix() * m.weights.values();
  const TailRisk tail = historical_cvar(std::vector<double>(pnl.data(), pnl.data() + pnl.size()), cfg.cvar_alpha);
  m.confidence = 1.0 - std::clamp(tail.cvar / cfg.cvar_budget, 0.0, 1.0);
  if (view.universe_vol > cfg.theta_vol) m.regime = Regime::Stress;
  else if (view.universe_vol > 0.5 * cfg.theta_vol) m.regime = Regime::Bear;
  else m.regime = Regime::Bull;
  stamp_message(m, ctx, previous);
  return m;
}

void RiskAgent::begin_rebalance(const MarketContext& ctx) {
  if (view_day_ == ctx.day && view_) return;
  view_ = risk_view(ctx);
  view_day_ = ctx.day;
  by_budget_.clear();
}

AgentMessage RiskAgent::propose(const MarketContext& ctx, const BroadcastMessage* prior,
                                const AgentMessage* previous) {
  if (view_day_ != ctx.day || !view_) begin_rebalance(ctx);
  const double key = view_->breaker ? -1.0 : (prior ? prior->mean_geo : view_->grs);
  auto it = by_budget_.find(key);
  if (it == by_budget_.end()) it = by_budget_.emplace(key, risk_propose(ctx, prior, *view_, nullptr)).first;
  AgentMessage m = it->second;
  stamp_message(m, ctx, previous);
  return m;
}

}  // namespace rmats
