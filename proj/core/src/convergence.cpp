#include "rmats/backtest.hpp"
#include "rmats/csv.hpp"
#include "rmats/error.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>

namespace rmats {

ConvergenceSummary convergence_summary(const std::vector<ConvergenceLog>& logs) {
  ConvergenceSummary s;
  s.count = logs.size();
  if (logs.empty()) return s;
  std::vector<int> rounds;
  rounds.reserve(logs.size());
  double total = 0.0;
  std::size_t within = 0;
  for (const auto& l : logs) {
    rounds.push_back(l.rounds_used);
    total += l.rounds_used;
    if (l.rounds_used <= 2) ++within;
  }
  std::sort(rounds.begin(), rounds.end());
  const std::size_t m = rounds.size();
  s.median_rounds = m % 2 == 1 ? rounds[m / 2] : 0.5 * (rounds[m / 2 - 1] + rounds[m / 2]);
  s.mean_rounds = total / static_cast<double>(m);
  s.max_rounds = rounds.back();
  s.fraction_within_2 = static_cast<double>(within) / static_cast<double>(m);

  std::vector<double> sums;
  std::vector<std::size_t> counts;
  double opening = 0.0;
  std::size_t reached = 0;
  for (const auto& l : logs) {
    if (l.deltas.empty()) continue;
    opening += l.opening_delta;
    ++reached;
    if (sums.size() < l.deltas.size()) {
      sums.resize(l.deltas.size(), 0.0);
      counts.resize(l.deltas.size(), 0);
    }
    for (std::size_t k = 0; k < l.deltas.size(); ++k) {
      sums[k] += l.deltas[k];
      ++counts[k];
    }
  }
  for (std::size_t k = 0; k < sums.size(); ++k) s.delta_curve.push_back(sums[k] / static_cast<double>(counts[k]));
  if (reached > 0) {
    s.opening_delta_mean = opening / static_cast<double>(reached);
    if (s.opening_delta_mean > 0.0) s.first_drop = 1.0 - s.delta_curve.front() / s.opening_delta_mean;
  }
  return s;
}

ConvergenceStats convergence_stats(const std::vector<ConvergenceLog>& logs) {
  ConvergenceStats st;
  std::vector<ConvergenceLog> normal, stress;
  for (const auto& l : logs) (l.stress ? stress : normal).push_back(l);
  st.all = convergence_summary(logs);
  st.normal = convergence_summary(normal);
  st.stress = convergence_summary(stress);
  return st;
}

std::vector<ConvergenceLog> convergence_logs(const BacktestResult& result) {
  std::vector<ConvergenceLog> logs;
  for (const auto& rb : result.rebalances) {
    if (!rb.coordination) continue;
    const auto& c = *rb.coordination;
    ConvergenceLog l;
    l.date = format_date(rb.date);
    l.rounds_used = c.rounds_used;
    l.converged = c.converged;
    l.override_fired = c.override_fired;
    l.stress = rb.event_active;
    l.opening_delta = c.opening_delta;
    l.deltas = c.deltas;
    logs.push_back(std::move(l));
  }
  return logs;
}

namespace {

const char* flag(bool b) { return b ? "1" : "0"; }

}  // namespace

void write_rounds(std::ostream& out, const BacktestResult& result) {
  out << "rebalance,round,agent,field,value\n";
  std::size_t k = 0;
  for (const auto& rb : result.rebalances) {
    if (!rb.coordination) continue;
    const auto& c = *rb.coordination;
    auto row = [&](int round, const std::string& agent, const std::string& field, const std::string& value) {
      out << k << ',' << round << ',' << agent << ',' << field << ',' << value << '\n';
    };
    row(0, "manager", "date", format_date(rb.date));
    row(0, "manager", "rounds_used", std::to_string(c.rounds_used));
    row(0, "manager", "converged", flag(c.converged));
    row(0, "manager", "override_fired", flag(c.override_fired));
    row(0, "manager", "opening_delta", format_number(c.opening_delta));
    row(0, "manager", "stress", flag(rb.event_active));
    for (const auto& rec : c.rounds) {
      for (std::size_t i = 0; i < rec.messages.size(); ++i) {
        const auto& m = rec.messages[i];
        const std::string& a = c.agent_names[i];
        row(rec.round, a, "confidence", format_number(m.confidence));
        row(rec.round, a, "geo_risk", format_number(m.geo_risk));
        row(rec.round, a, "regime", std::string(to_string(m.regime)));
        row(rec.round, a, "timestamp", std::to_string(m.timestamp));
        row(rec.round, a, "delta", format_number(m.delta));
        row(rec.round, a, "circuit_breaker", flag(m.circuit_breaker));
        for (std::size_t j = 0; j < m.weights.size(); ++j) row(rec.round, a, "w." + result.tickers[j], format_number(m.weights[j]));
      }
      const auto& b = rec.broadcast;
      for (std::size_t j = 0; j < b.agg_weights.size(); ++j) {
        row(rec.round, "manager", "aggregate." + result.tickers[j], format_number(b.agg_weights[j]));
      }
      row(rec.round, "manager", "mean_geo", format_number(b.mean_geo));
      row(rec.round, "manager", "consensus_regime", std::string(to_string(b.consensus_regime)));
      for (std::size_t i = 0; i < b.health.size(); ++i) row(rec.round, "manager", "health." + c.agent_names[i], format_number(b.health[i]));
      if (rec.aggregate_delta) row(rec.round, "manager", "aggregate_delta", format_number(*rec.aggregate_delta));
      row(rec.round, "manager", "fallback", flag(rec.fallback));
    }
    ++k;
  }
}

std::vector<ConvergenceLog> read_rounds(std::istream& in, std::string_view source) {
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw ValidationError(std::string(source) + ": line " + std::to_string(line_no) + ": " + what);
  };
  bool header = false;
  std::map<long, ConvergenceLog> logs;
  std::map<long, std::map<long, double>> deltas;
  std::map<long, bool> has_rounds_used;
  while (std::getline(in, line)) {
    ++line_no;
    csv::normalize_line(line, line_no == 1);
    if (csv::trim(line).empty()) continue;
    const auto f = csv::split(line);
    if (!header) {
      if (f.size() != 5 || f[0] != "rebalance" || f[1] != "round" || f[2] != "agent" || f[3] != "field" || f[4] != "value") {
        fail("expected header 'rebalance,round,agent,field,value'");
      }
      header = true;
      continue;
    }
    if (f.size() != 5) fail("expected 5 fields, found " + std::to_string(f.size()));
    const auto reb = csv::to_int(f[0]);
    const auto round = csv::to_int(f[1]);
    if (!reb || *reb < 0) fail("bad rebalance index '" + f[0] + "'");
    if (!round || *round < 0) fail("bad round '" + f[1] + "'");
    if (f[2] != "manager") continue;
    auto& l = logs[*reb];
    const std::string& field = f[3];
    const std::string& value = f[4];
    auto number = [&]() {
      const auto v = csv::to_double(value);
      if (!v) fail("bad value '" + value + "' for " + field);
      return *v;
    };
    auto boolean = [&]() {
      if (value != "0" && value != "1") fail("bad flag '" + value + "' for " + field);
      return value == "1";
    };
    if (*round == 0) {
      if (field == "date") l.date = value;
      else if (field == "rounds_used") {
        const auto v = csv::to_int(value);
        if (!v || *v < 1) fail("bad rounds_used '" + value + "'");
        l.rounds_used = static_cast<int>(*v);
        has_rounds_used[*reb] = true;
      } else if (field == "converged") l.converged = boolean();
      else if (field == "override_fired") l.override_fired = boolean();
      else if (field == "opening_delta") l.opening_delta = number();
      else if (field == "stress") l.stress = boolean();
    } else if (field == "aggregate_delta") {
      deltas[*reb][*round] = number();
    }
  }
  if (!header) throw ValidationError(std::string(source) + ": empty rounds file");
  std::vector<ConvergenceLog> out;
  for (auto& [k, l] : logs) {
    if (!has_rounds_used[k]) throw ValidationError(std::string(source) + ": rebalance " + std::to_string(k) + " has no rounds_used");
    for (const auto& [r, d] : deltas[k]) l.deltas.push_back(d);
    out.push_back(std::move(l));
  }
  return out;
}

}  // namespace rmats
