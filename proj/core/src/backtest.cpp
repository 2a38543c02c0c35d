#include "rmats/backtest.hpp"

#include "rmats/error.hpp"

#include <algorithm>
#include <cmath>

namespace rmats {

TradableData tradable_data(const PriceTable& prices, const StrategyConfig& cfg) {
  TradableData d;
  d.universe = cfg.universe_for(prices.tickers);
  std::vector<std::size_t> columns;
  for (const auto& t : d.universe.tickers) columns.push_back(*prices.column_of(t));
  d.prices = prices.select_columns(columns);
  return d;
}

std::vector<std::size_t> rebalance_rows(const PriceTable& prices, std::size_t first, std::size_t last) {
  std::vector<std::size_t> rows;
  if (first >= last) return rows;
  rows.push_back(first);
  for (std::size_t t = first + 1; t < last; ++t) {
    if (prices.dates[t].month() != prices.dates[t - 1].month() || prices.dates[t].year() != prices.dates[t - 1].year()) {
      rows.push_back(t);
    }
  }
  return rows;
}

BacktestResult run_backtest(Strategy& strategy, const PriceTable& prices, const StrategyConfig& cfg,
                            const std::vector<EventWindow>& events) {
  const TradableData data = tradable_data(prices, cfg);
  const PriceTable& p = data.prices;
  if (p.rows() < 2) throw Error("backtest: price table too short");

  const std::size_t first = p.lower_bound(cfg.start);
  std::size_t last = first;
  while (last + 1 < p.rows() && !(cfg.end < p.dates[last + 1])) ++last;
  if (first >= p.rows() || cfg.end < p.dates[first]) throw Error("backtest: no trading days between start and end");
  if (first < static_cast<std::size_t>(cfg.warmup)) {
    throw Error("insufficient warm-up: " + std::to_string(first) + " rows before " + format_date(p.dates[first]) +
                ", need " + std::to_string(cfg.warmup));
  }
  if (last == first) throw Error("backtest: simulation window has a single day");

  BacktestResult res;
  res.strategy = strategy.name();
  res.tickers = p.tickers;
  const auto n = static_cast<Eigen::Index>(p.cols());
  const std::vector<std::size_t> rebalances = rebalance_rows(p, first, last);
  std::size_t next_rebalance = 0;

  double equity = cfg.initial_equity;
  double peak = equity;
  Vector holdings = Vector::Zero(n);
  bool invested = false;
  for (std::size_t t = first; t <= last; ++t) {
    if (t > first) {
      const Vector gross = (p.prices.row(static_cast<Eigen::Index>(t)).array() /
                            p.prices.row(static_cast<Eigen::Index>(t - 1)).array())
                               .matrix()
                               .transpose();
      const double growth = holdings.dot(gross);
      equity *= growth;
      holdings = (holdings.array() * gross.array()).matrix() / growth;
    }
    peak = std::max(peak, equity);
    res.dates.push_back(p.dates[t]);
    res.equity.push_back(equity);

    if (next_rebalance < rebalances.size() && rebalances[next_rebalance] == t) {
      ++next_rebalance;
      MarketContext ctx(data.universe, cfg, p.head(t + 1));
      ctx.day = static_cast<long>(t);
      if (invested) ctx.holdings = Weights(holdings);
      ctx.drawdown = peak > 0.0 ? 1.0 - equity / peak : 0.0;
      const int ev = event_index_at(events, p.dates[t]);
      if (ev >= 0) {
        ctx.event_active = true;
        ctx.event_onset_row = p.lower_bound(events[static_cast<std::size_t>(ev)].start);
      }
      Decision d = strategy.decide(ctx);
      if (d.weights.size() != p.cols() || !d.weights.on_simplex(1e-8)) {
        throw Error("strategy '" + res.strategy + "' returned weights off the simplex on " + format_date(p.dates[t]));
      }
      Rebalance rb;
      rb.row = t;
      rb.date = p.dates[t];
      rb.weights = d.weights;
      rb.turnover = invested ? (d.weights.values() - holdings).lpNorm<1>() : d.weights.values().lpNorm<1>();
      rb.cost = cfg.cost_bps * 1e-4 * rb.turnover * equity;
      rb.event_active = ctx.event_active;
      rb.coordination = std::move(d.coordination);
      equity -= rb.cost;
      holdings = d.weights.values();
      invested = true;
      res.rebalances.push_back(std::move(rb));
    }
  }
  return res;
}

double max_drawdown(const std::vector<double>& equity) {
  double peak = -std::numeric_limits<double>::infinity();
  double mdd = 0.0;
  for (double e : equity) {
    peak = std::max(peak, e);
    if (peak > 0.0) mdd = std::max(mdd, 1.0 - e / peak);
  }
  return mdd;
}

Metrics performance_metrics(const std::vector<double>& equity, double risk_free) {
  if (equity.size() < 2) throw Error("performance_metrics: need at least 2 equity points");
  for (double e : equity) {
    if (!(e > 0.0) || !std::isfinite(e)) throw Error("performance_metrics: equity must stay positive");
  }
  Metrics m;
  const double periods = static_cast<double>(equity.size() - 1);
  m.ann_return = std::pow(equity.back() / equity.front(), 252.0 / periods) - 1.0;

  std::vector<double> r(equity.size() - 1);
  for (std::size_t t = 1; t < equity.size(); ++t) r[t - 1] = equity[t] / equity[t - 1] - 1.0;
  double mean = 0.0;
  for (double x : r) mean += x;
  mean /= static_cast<double>(r.size());
  double ss = 0.0;
  for (double x : r) ss += (x - mean) * (x - mean);
  const double sd = r.size() > 1 ? std::sqrt(ss / static_cast<double>(r.size() - 1)) : 0.0;
  m.volatility = sd * std::sqrt(252.0);
  if (sd > 0.0) {
    m.sharpe = (mean - risk_free / 252.0) / sd * std::sqrt(252.0);
  } else {
    m.sharpe_degenerate = true;
  }
  m.mdd = max_drawdown(equity);
  if (m.mdd > 0.0) {
    m.calmar = m.ann_return / m.mdd;
  } else {
    m.calmar_degenerate = true;
  }
  return m;
}

Metrics performance_metrics(const BacktestResult& result, const StrategyConfig& cfg) {
  return performance_metrics(result.equity, cfg.risk_free);
}

EventTable event_window_returns(const std::vector<Date>& dates, const std::vector<double>& equity,
                                const std::vector<EventWindow>& events) {
  if (dates.size() != equity.size()) throw Error("event_window_returns: dates and equity differ in length");
  EventTable table;
  for (const auto& e : events) {
    std::vector<double> window;
    for (std::size_t t = 0; t < dates.size(); ++t) {
      if (!(dates[t] < e.start) && !(e.end < dates[t])) window.push_back(equity[t]);
    }
    if (dates.empty() || e.start < dates.front() || dates.back() < e.end || window.empty()) {
      throw Error("event '" + e.name + "' lies outside the backtest range");
    }
    EventResult r;
    r.name = e.name;
    r.cumulative_return = window.back() / window.front() - 1.0;
    r.drawdown = max_drawdown(window);
    table.events.push_back(std::move(r));
  }
  if (!table.events.empty()) {
    double sum = 0.0;
    for (const auto& r : table.events) sum += r.drawdown;
    table.avg_edd = sum / static_cast<double>(table.events.size());
  }
  return table;
}

EventTable event_window_returns(const BacktestResult& result, const std::vector<EventWindow>& events) {
  return event_window_returns(result.dates, result.equity, events);
}

}  // namespace rmats
