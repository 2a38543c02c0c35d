#include "rmats/config.hpp"

#include "rmats/csv.hpp"
#include "rmats/error.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <set>

namespace rmats {

namespace {

struct Field {
  std::string key;
  std::function<void(StrategyConfig&, std::string_view)> set;
  std::function<std::string(const StrategyConfig&)> get;
};

[[noreturn]] void bad(std::string_view key, const std::string& why) {
  throw ValidationError("config key '" + std::string(key) + "': " + why);
}

double to_real(std::string_view key, std::string_view value) {
  double v = 0.0;
  if (!csv::parse_double(value, v)) bad(key, "not a number: '" + std::string(value) + "'");
  return v;
}

long to_integer(std::string_view key, std::string_view value) {
  long v = 0;
  if (!csv::parse_int(value, v)) bad(key, "not an integer: '" + std::string(value) + "'");
  return v;
}

struct Range {
  double lo;
  double hi;
  bool lo_open = false;
  bool hi_open = false;
};

void check(std::string_view key, double v, Range r) {
  const bool lo_ok = r.lo_open ? v > r.lo : v >= r.lo;
  const bool hi_ok = r.hi_open ? v < r.hi : v <= r.hi;
  if (!lo_ok || !hi_ok) {
    bad(key, "value " + format_number(v) + " outside " + (r.lo_open ? "(" : "[") + format_number(r.lo) + ", " +
                 format_number(r.hi) + (r.hi_open ? ")" : "]"));
  }
}

constexpr double kInf = std::numeric_limits<double>::infinity();

Field real(std::string key, double StrategyConfig::*member, Range range) {
  return Field{key,
               [=](StrategyConfig& c, std::string_view v) {
                 const double x = to_real(key, v);
                 check(key, x, range);
                 c.*member = x;
               },
               [=](const StrategyConfig& c) { return format_number(c.*member); }};
}

Field integer(std::string key, int StrategyConfig::*member, long lo, long hi) {
  return Field{key,
               [=](StrategyConfig& c, std::string_view v) {
                 const long x = to_integer(key, v);
                 if (x < lo || x > hi) {
                   bad(key, "value " + std::to_string(x) + " outside [" + std::to_string(lo) + ", " +
                                std::to_string(hi) + "]");
                 }
                 c.*member = static_cast<int>(x);
               },
               [=](const StrategyConfig& c) { return std::to_string(c.*member); }};
}

template <std::size_t N>
void add_array(std::vector<Field>& fields, const std::string& prefix, std::array<double, N> StrategyConfig::*member,
               const std::array<std::string_view, N>& names, Range range) {
  for (std::size_t i = 0; i < N; ++i) {
    const std::string key = prefix + std::string(names[i]);
    fields.push_back(Field{key,
                           [=](StrategyConfig& c, std::string_view v) {
                             const double x = to_real(key, v);
                             check(key, x, range);
                             (c.*member)[i] = x;
                           },
                           [=](const StrategyConfig& c) { return format_number((c.*member)[i]); }});
  }
}

Field date_field(std::string key, Date StrategyConfig::*member) {
  return Field{key,
               [=](StrategyConfig& c, std::string_view v) {
                 auto d = parse_date(v);
                 if (!d) bad(key, "not an ISO date: '" + std::string(v) + "'");
                 c.*member = *d;
               },
               [=](const StrategyConfig& c) { return format_date(c.*member); }};
}

std::vector<std::string> split_list(std::string_view value) {
  std::vector<std::string> out;
  if (csv::trim(value).empty()) return out;
  for (auto& item : csv::split(value)) out.emplace_back(csv::trim(item));
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    out += items[i];
  }
  return out;
}

const std::vector<Field>& fields() {
  static const std::vector<Field> all = [] {
    using C = StrategyConfig;
    const Range unit{0.0, 1.0};
    const Range open_unit{0.0, 1.0, true, false};
    const Range positive{0.0, kInf, true, false};
    const Range nonneg{0.0, kInf};
    std::vector<Field> f;
    f.push_back(real("eps", &C::eps, positive));
    f.push_back(integer("r_max", &C::r_max, 1, 64));
    f.push_back(real("health.alpha", &C::health_alpha, nonneg));
    f.push_back(real("health.beta", &C::health_beta, nonneg));
    f.push_back(real("health.gamma", &C::health_gamma, nonneg));
    f.push_back(real("health.delta", &C::health_delta, nonneg));
    f.push_back(real("health.init", &C::health_init, unit));
    f.push_back(integer("health.window", &C::health_window, 2, 2520));

    f.push_back(real("lambda1", &C::lambda1, nonneg));
    f.push_back(real("lambda2", &C::lambda2, nonneg));
    f.push_back(real("theta", &C::theta, Range{0.0, 1.0, true, true}));

    f.push_back(real("ewma.decay", &C::ewma_decay, Range{0.0, 1.0, true, true}));
    f.push_back(integer("ewma.window", &C::ewma_window, 30, 5040));
    f.push_back(real("cvar.alpha", &C::cvar_alpha, Range{0.5, 1.0, true, true}));
    f.push_back(real("cvar.budget", &C::cvar_budget, positive));
    f.push_back(integer("cvar.window", &C::cvar_window, 50, 5040));
    f.push_back(real("theta_dd", &C::theta_dd, open_unit));
    f.push_back(real("theta_geo", &C::theta_geo, open_unit));
    f.push_back(real("theta_vol", &C::theta_vol, open_unit));
    f.push_back(real("geo_adapt", &C::geo_adapt, Range{0.0, 1.0, false, true}));

    f.push_back(real("grs.a", &C::grs_a, nonneg));
    f.push_back(real("grs.b", &C::grs_b, nonneg));
    f.push_back(real("grs.c", &C::grs_c, nonneg));
    f.push_back(integer("grs.window", &C::grs_window, 10, 252));
    f.push_back(integer("grs.lookback", &C::grs_lookback, 20, 2520));
    f.push_back(real("sentiment.stress", &C::sentiment_stress, unit));
    f.push_back(real("sentiment.bear", &C::sentiment_bear, unit));
    f.push_back(real("sentiment.conf_min", &C::sentiment_conf_min, unit));
    f.push_back(real("sentiment.conf_max", &C::sentiment_conf_max, unit));
    f.push_back(integer("did.window", &C::did_window, 2, 252));

    f.push_back(integer("hmm.window", &C::hmm_window, 50, 5040));
    f.push_back(integer("hmm.max_iter", &C::hmm_max_iter, 1, 10000));
    f.push_back(real("hmm.tol", &C::hmm_tol, positive));
    f.push_back(integer("hmm.vol_window", &C::hmm_vol_window, 2, 252));
    f.push_back(real("analysis.blend", &C::analysis_blend, unit));
    f.push_back(real("kalman.q", &C::kalman_q, positive));
    f.push_back(real("kalman.r", &C::kalman_r, positive));
    const std::array<std::string_view, kTemplateGroupCount> groups{"us_equity", "intl_equity", "fixed_income",
                                                                   "gold", "commodity"};
    add_array(f, "template.bull.", &C::template_bull, groups, unit);
    add_array(f, "template.bear.", &C::template_bear, groups, unit);
    add_array(f, "template.stress.", &C::template_stress, groups, unit);

    f.push_back(real("report.temperature", &C::report_temperature, positive));
    f.push_back(real("report.conf_min", &C::report_conf_min, unit));
    f.push_back(real("report.conf_max", &C::report_conf_max, unit));
    f.push_back(integer("report.conf_window", &C::report_conf_window, 2, 252));

    f.push_back(real("risk_aversion", &C::risk_aversion, positive));
    f.push_back(real("opt.step", &C::opt_step, positive));
    f.push_back(integer("opt.iterations", &C::opt_iterations, 1, 100000));
    f.push_back(integer("opt.projection_cycles", &C::proj_cycles, 1, 100000));
    f.push_back(real("opt.projection_tol", &C::proj_tol, positive));
    f.push_back(real("gamma0", &C::gamma0, positive));
    f.push_back(real("geo_tighten", &C::geo_tighten, Range{0.0, 1.0, false, true}));
    const std::array<std::string_view, kAssetClassCount> classes{"us_equity", "intl_equity", "fixed_income",
                                                                 "commodity"};
    add_array(f, "cap.", &C::caps, classes, open_unit);
    add_array(f, "geo_sens.", &C::geo_sens, classes, unit);
    f.push_back(real("geo_sens.defensive", &C::geo_sens_defensive, unit));
    f.push_back(integer("mu.window", &C::mu_window, 2, 2520));
    f.push_back(real("mu.shrink", &C::mu_shrink, unit));
    f.push_back(Field{"mvo.lambda_grid",
                      [](C& c, std::string_view v) {
                        c.mvo_lambda_grid.clear();
                        for (const auto& item : split_list(v)) {
                          const double x = to_real("mvo.lambda_grid", item);
                          check("mvo.lambda_grid", x, Range{0.0, kInf, true, false});
                          c.mvo_lambda_grid.push_back(x);
                        }
                      },
                      [](const C& c) {
                        std::vector<std::string> items;
                        for (double x : c.mvo_lambda_grid) items.push_back(format_number(x));
                        return join(items);
                      }});

    f.push_back(real("cost_bps", &C::cost_bps, nonneg));
    f.push_back(date_field("start", &C::start));
    f.push_back(date_field("end", &C::end));
    f.push_back(real("initial_equity", &C::initial_equity, positive));
    f.push_back(real("risk_free", &C::risk_free, Range{-1.0, 1.0}));
    f.push_back(integer("warmup", &C::warmup, 0, 100000));
    f.push_back(Field{"benchmark", [](C& c, std::string_view v) { c.benchmark = std::string(csv::trim(v)); },
                      [](const C& c) { return c.benchmark; }});
    f.push_back(Field{"seed",
                      [](C& c, std::string_view v) {
                        const long x = to_integer("seed", v);
                        if (x < 0) bad("seed", "must be non-negative");
                        c.seed = static_cast<std::uint64_t>(x);
                      },
                      [](const C& c) { return std::to_string(c.seed); }});
    f.push_back(Field{"defensive",
                      [](C& c, std::string_view v) { c.defensive = split_list(v); },
                      [](const C& c) { return join(c.defensive.value_or(default_defensive_tickers())); }});
    return f;
  }();
  return all;
}

}  // namespace

void StrategyConfig::set(std::string_view key, std::string_view value) {
  constexpr std::string_view class_prefix = "class.";
  if (key.substr(0, class_prefix.size()) == class_prefix && key.size() > class_prefix.size()) {
    auto c = asset_class_from_string(csv::trim(value));
    if (!c) bad(key, "unknown asset class '" + std::string(value) + "'");
    class_overrides[std::string(key.substr(class_prefix.size()))] = *c;
    return;
  }
  for (const auto& f : fields()) {
    if (f.key == key) {
      f.set(*this, value);
      return;
    }
  }
  throw ValidationError("unknown config key '" + std::string(key) + "'");
}

void StrategyConfig::validate() const {
  if (health_alpha + health_beta + health_gamma < health_delta) {
    bad("health.delta", "health.alpha + health.beta + health.gamma must be >= health.delta");
  }
  double cap_sum = 0.0;
  for (double c : caps) cap_sum += c;
  if (cap_sum < 1.0) bad("cap.*", "sector caps must sum to at least 1");
  if (!(start < end)) bad("end", "start must precede end");
  if (sentiment_bear > sentiment_stress) bad("sentiment.bear", "must not exceed sentiment.stress");
  if (sentiment_conf_min > sentiment_conf_max) bad("sentiment.conf_min", "must not exceed sentiment.conf_max");
  if (report_conf_min > report_conf_max) bad("report.conf_min", "must not exceed report.conf_max");
  const std::array<std::pair<const char*, const GroupFractions*>, 3> templates{
      {{"template.bull", &template_bull}, {"template.bear", &template_bear}, {"template.stress", &template_stress}}};
  for (const auto& [name, t] : templates) {
    double s = 0.0;
    for (double x : *t) s += x;
    if (std::abs(s - 1.0) > 1e-9) bad(std::string(name) + ".*", "fractions must sum to 1");
  }
  if (grs_window > grs_lookback) bad("grs.window", "must not exceed grs.lookback");
}

std::vector<std::pair<std::string, std::string>> StrategyConfig::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : fields()) out.emplace_back(f.key, f.get(*this));
  for (const auto& [ticker, c] : class_overrides) out.emplace_back("class." + ticker, std::string(to_string(c)));
  return out;
}

AssetUniverse StrategyConfig::universe_for(const std::vector<std::string>& tickers) const {
  AssetUniverse u;
  const auto& defensive_list = defensive ? *defensive : default_defensive_tickers();
  std::set<std::string, std::less<>> defensive_set(defensive_list.begin(), defensive_list.end());
  for (const auto& t : tickers) {
    if (!benchmark.empty() && t == benchmark) continue;
    AssetClass c{};
    if (auto it = class_overrides.find(t); it != class_overrides.end()) {
      c = it->second;
    } else if (auto jt = default_asset_classes().find(t); jt != default_asset_classes().end()) {
      c = jt->second;
    } else {
      throw ValidationError("no asset class for ticker '" + t + "' (set class." + t + "=<class>)");
    }
    u.tickers.push_back(t);
    u.classes.push_back(c);
    u.defensive.push_back(defensive_set.count(t) > 0);
  }
  if (u.tickers.empty()) throw ValidationError("tradable universe is empty");
  return u;
}

std::vector<KeyValue> read_key_values(std::istream& in, std::string_view source) {
  std::vector<KeyValue> out;
  std::set<std::string, std::less<>> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    csv::normalize_line(line, line_no == 1);
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto text = csv::trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError(std::string(source) + ": line " + std::to_string(line_no) + ": expected key=value");
    }
    KeyValue kv{line_no, std::string(csv::trim(text.substr(0, eq))), std::string(csv::trim(text.substr(eq + 1)))};
    if (kv.key.empty()) {
      throw ValidationError(std::string(source) + ": line " + std::to_string(line_no) + ": empty key");
    }
    if (!seen.insert(kv.key).second) {
      throw ValidationError(std::string(source) + ": line " + std::to_string(line_no) + ": duplicate key '" +
                            kv.key + "'");
    }
    out.push_back(std::move(kv));
  }
  return out;
}

StrategyConfig parse_config(std::istream& in, std::string_view source) {
  StrategyConfig cfg;
  for (const auto& kv : read_key_values(in, source)) {
    try {
      cfg.set(kv.key, kv.value);
    } catch (const ValidationError& e) {
      throw ValidationError(std::string(source) + ": line " + std::to_string(kv.line) + ": " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

StrategyConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open config file " + path.string());
  return parse_config(in, path.string());
}

}  // namespace rmats
