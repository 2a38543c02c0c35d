#include "cli.hpp"

#include "rmats/backtest.hpp"
#include "rmats/config.hpp"
#include "rmats/csv.hpp"
#include "rmats/error.hpp"
#include "rmats/events.hpp"
#include "rmats/price_table.hpp"
#include "rmats/risk.hpp"
#include "rmats/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

namespace rmats::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunOptions {
  std::string strategy = "rmats";
  std::string prices;
  std::string config;
  std::string events;
  std::string scenarios;
  std::string out;
  std::string variants;
  std::optional<std::uint64_t> seed;
};

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json metrics_json(const Metrics& m) {
  return json{{"ann_return", number(m.ann_return)},
              {"sharpe", number(m.sharpe)},
              {"mdd", number(m.mdd)},
              {"calmar", number(m.calmar)},
              {"volatility", number(m.volatility)},
              {"sharpe_degenerate", m.sharpe_degenerate},
              {"calmar_degenerate", m.calmar_degenerate}};
}

json events_json(const EventTable& t) {
  json rows = json::array();
  for (const auto& e : t.events) {
    rows.push_back({{"name", e.name}, {"return", number(e.cumulative_return)}, {"edd", number(e.drawdown)}});
  }
  return json{{"windows", rows}, {"avg_edd", number(t.avg_edd)}};
}

json summary_json(const ConvergenceSummary& s) {
  json curve = json::array();
  for (double d : s.delta_curve) curve.push_back(number(d));
  return json{{"count", s.count},
              {"median_rounds", number(s.median_rounds)},
              {"mean_rounds", number(s.mean_rounds)},
              {"max_rounds", s.max_rounds},
              {"fraction_within_2", number(s.fraction_within_2)},
              {"delta_curve", curve},
              {"opening_delta_mean", number(s.opening_delta_mean)},
              {"first_round_drop", number(s.first_drop)}};
}

json convergence_json(const ConvergenceStats& st) {
  return json{{"all", summary_json(st.all)}, {"normal", summary_json(st.normal)}, {"stress", summary_json(st.stress)}};
}

json config_json(const StrategyConfig& cfg) {
  json j = json::object();
  for (const auto& [k, v] : cfg.entries()) j[k] = v;
  return j;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  for (const auto& f : csv::split(text)) {
    const auto t = csv::trim(f);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

StrategyConfig load_run_config(const RunOptions& o) {
  StrategyConfig cfg = o.config.empty() ? StrategyConfig{} : load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  cfg.validate();
  return cfg;
}

std::vector<EventWindow> load_run_events(const RunOptions& o) {
  return o.events.empty() ? default_events() : load_events(o.events);
}

void write_text(const fs::path& path, const std::string& text) { csv::write_file_atomic(path, text); }

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string equity_csv(const std::vector<BacktestResult>& results) {
  std::ostringstream s;
  s << "date";
  for (const auto& r : results) s << ',' << r.strategy;
  s << '\n';
  for (std::size_t t = 0; t < results.front().dates.size(); ++t) {
    s << format_date(results.front().dates[t]);
    for (const auto& r : results) s << ',' << format_number(r.equity[t]);
    s << '\n';
  }
  return s.str();
}

std::string weights_csv(const BacktestResult& r) {
  std::ostringstream s;
  s << "date,ticker,weight\n";
  for (const auto& rb : r.rebalances) {
    for (std::size_t i = 0; i < r.tickers.size(); ++i) {
      s << format_date(rb.date) << ',' << r.tickers[i] << ',' << format_number(rb.weights[i]) << '\n';
    }
  }
  return s.str();
}

int cmd_backtest(const RunOptions& o) {
  const StrategyConfig cfg = load_run_config(o);
  const PriceTable prices = load_price_table(o.prices);
  const auto events = load_run_events(o);
  const auto names = split_list(o.strategy);
  if (names.empty()) throw ValidationError("--strategy: empty strategy list");
  std::vector<std::unique_ptr<Strategy>> strategies;
  for (const auto& n : names) strategies.push_back(make_strategy(n, cfg));

  std::vector<BacktestResult> results;
  for (auto& s : strategies) results.push_back(run_backtest(*s, prices, cfg, events));

  json report;
  report["config"] = config_json(cfg);
  report["primary"] = names.front();
  report["rebalances"] = results.front().rebalances.size();
  report["trading_days"] = results.front().dates.size();
  report["start"] = format_date(results.front().dates.front());
  report["end"] = format_date(results.front().dates.back());
  json table = json::object();
  for (const auto& r : results) {
    double turnover = 0.0, cost = 0.0;
    for (const auto& rb : r.rebalances) {
      turnover += rb.turnover;
      cost += rb.cost;
    }
    table[r.strategy] = json{{"metrics", metrics_json(performance_metrics(r, cfg))},
                             {"events", events_json(event_window_returns(r, events))},
                             {"final_equity", number(r.equity.back())},
                             {"total_turnover", number(turnover)},
                             {"total_cost", number(cost)}};
  }
  report["strategies"] = table;

  const TradableData data = tradable_data(prices, cfg);
  const auto scenarios = o.scenarios.empty() ? calibrate_scenarios(data.prices, events)
                                             : load_scenarios(o.scenarios, data.universe.tickers);
  const auto losses = stress_test(results.front().rebalances.back().weights, scenarios);
  json stress = json::array();
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    stress.push_back({{"scenario", scenarios[s].name}, {"loss", number(losses[s])}});
  }
  report["stress_test"] = stress;

  fs::create_directories(o.out);
  const fs::path dir(o.out);
  write_text(dir / "equity.csv", equity_csv(results));
  write_text(dir / "weights.csv", weights_csv(results.front()));
  for (const auto& r : results) {
    if (r.strategy != "rmats") continue;
    std::ostringstream rounds;
    write_rounds(rounds, r);
    write_text(dir / "rounds.csv", rounds.str());
    report["convergence"] = convergence_json(convergence_stats(convergence_logs(r)));
    break;
  }
  write_json(dir / "report.json", report);
  return kOk;
}

int cmd_ablate(const RunOptions& o) {
  const StrategyConfig cfg = load_run_config(o);
  const PriceTable prices = load_price_table(o.prices);
  const auto events = load_run_events(o);
  const auto variants = o.variants.empty() ? ablation_variants() : split_list(o.variants);
  if (variants.empty()) throw ValidationError("--variants: empty variant list");
  const auto rows = run_ablation(prices, cfg, variants, events);

  json table = json::array();
  std::ostringstream csv_out;
  csv_out << "variant,ann_return,sharpe,mdd,calmar,avg_edd,max_rounds\n";
  for (const auto& r : rows) {
    table.push_back({{"variant", r.variant},
                     {"metrics", metrics_json(r.metrics)},
                     {"avg_edd", number(r.avg_edd)},
                     {"max_rounds", r.max_rounds},
                     {"convergence", convergence_json(convergence_stats(convergence_logs(r.result)))}});
    csv_out << r.variant << ',' << format_number(r.metrics.ann_return) << ',' << format_number(r.metrics.sharpe) << ','
            << format_number(r.metrics.mdd) << ',' << format_number(r.metrics.calmar) << ','
            << format_number(r.avg_edd) << ',' << r.max_rounds << '\n';
  }
  json report;
  report["config"] = config_json(cfg);
  report["ablation"] = table;
  fs::create_directories(o.out);
  write_text(fs::path(o.out) / "ablation.csv", csv_out.str());
  write_json(fs::path(o.out) / "report.json", report);
  return kOk;
}

int cmd_convergence(const std::string& rounds_path, const std::string& out_path, std::ostream& out) {
  std::ifstream in(rounds_path);
  if (!in) throw ValidationError("cannot open rounds file " + rounds_path);
  const auto logs = read_rounds(in, rounds_path);
  const json j = convergence_json(convergence_stats(logs));
  if (out_path.empty()) {
    out << j.dump(2) << '\n';
  } else {
    write_json(out_path, j);
  }
  return kOk;
}

int cmd_synth(const std::string& spec_path, std::optional<std::uint64_t> seed, const std::string& out_path) {
  SynthSpec spec = load_synth_spec(spec_path);
  if (seed) spec.seed = *seed;
  std::ostringstream s;
  write_price_table(s, synth_prices(spec));
  write_text(out_path, s.str());
  return kOk;
}

int cmd_validate(const RunOptions& o, std::ostream& out) {
  if (o.prices.empty() && o.config.empty() && o.events.empty()) {
    throw ValidationError("validate: give at least one of --prices, --config, --events");
  }
  if (!o.config.empty()) {
    load_config(o.config).validate();
    out << "ok config " << o.config << '\n';
  }
  if (!o.prices.empty()) {
    const PriceTable p = load_price_table(o.prices);
    out << "ok prices " << o.prices << ": " << p.rows() << " rows, " << p.cols() << " tickers\n";
  }
  if (!o.events.empty()) {
    const auto e = load_events(o.events);
    out << "ok events " << o.events << ": " << e.size() << " windows\n";
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Recursive multi-agent portfolio engine"};
  app.require_subcommand(1);
  RunOptions o;
  std::uint64_t seed_value = 0;
  std::string rounds_path, out_path, spec_path;

  auto add_seed = [&](CLI::App* sub) {
    sub->add_option("--seed", seed_value, "Seed override")->each([&](const std::string&) { o.seed = seed_value; });
  };

  auto* bt = app.add_subcommand("backtest", "Run strategies over a price file");
  bt->add_option("--strategy", o.strategy, "Strategy or comma list: rmats, mvo, multifactor, sentiment_proxy, equal_weight");
  bt->add_option("--prices", o.prices, "Canonical price file")->required();
  bt->add_option("--config", o.config, "key=value config file");
  bt->add_option("--events", o.events, "Events file (name,start,end)");
  bt->add_option("--scenarios", o.scenarios, "Stress scenario file");
  bt->add_option("--out", o.out, "Output directory")->required();
  add_seed(bt);

  auto* ab = app.add_subcommand("ablate", "Run ablation variants");
  ab->add_option("--prices", o.prices, "Canonical price file")->required();
  ab->add_option("--config", o.config, "key=value config file");
  ab->add_option("--events", o.events, "Events file (name,start,end)");
  ab->add_option("--variants", o.variants, "Comma list: full, no_recursion, no_sentiment, no_risk, no_analysis, no_did");
  ab->add_option("--out", o.out, "Output directory")->required();
  add_seed(ab);

  auto* cv = app.add_subcommand("convergence", "Convergence statistics from a rounds file");
  cv->add_option("--rounds", rounds_path, "rounds.csv from a backtest")->required();
  cv->add_option("--out", out_path, "Output JSON file (default: stdout)");

  auto* sy = app.add_subcommand("synth", "Generate a synthetic price file");
  sy->add_option("--spec", spec_path, "Synthetic spec file")->required();
  sy->add_option("--out", out_path, "Output price file")->required();
  add_seed(sy);

  auto* va = app.add_subcommand("validate", "Lint price, config and events files");
  va->add_option("--prices", o.prices, "Canonical price file");
  va->add_option("--config", o.config, "key=value config file");
  va->add_option("--events", o.events, "Events file");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kValidation;
  }

  try {
    if (bt->parsed()) return cmd_backtest(o);
    if (ab->parsed()) return cmd_ablate(o);
    if (cv->parsed()) return cmd_convergence(rounds_path, out_path, out);
    if (sy->parsed()) return cmd_synth(spec_path, o.seed, out_path);
    if (va->parsed()) return cmd_validate(o, out);
  } catch (const rmats::ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kRuntime;
}

}  // namespace rmats::cli
