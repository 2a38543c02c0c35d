#include "rmats/synth.hpp"

#include "rmats/csv.hpp"
#include "rmats/error.hpp"

#include <cmath>
#include <fstream>
#include <random>

namespace rmats {

namespace {

[[noreturn]] void bad(std::string_view source, std::size_t line, std::string_view key, const std::string& why) {
  throw ValidationError(std::string(source) + ": line " + std::to_string(line) + ": spec key '" + std::string(key) +
                        "': " + why);
}

std::optional<Regime> regime_named(std::string_view s) {
  if (s == "bull") return Regime::Bull;
  if (s == "bear") return Regime::Bear;
  if (s == "stress") return Regime::Stress;
  return std::nullopt;
}

std::optional<TemplateGroup> group_named(std::string_view s) {
  for (std::size_t g = 0; g < kTemplateGroupCount; ++g) {
    if (to_string(static_cast<TemplateGroup>(g)) == s) return static_cast<TemplateGroup>(g);
  }
  return std::nullopt;
}

std::vector<std::string> list_of(std::string_view value) {
  std::vector<std::string> out;
  for (const auto& f : csv::split(value)) {
    const auto t = csv::trim(f);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

}  // namespace

AssetUniverse SynthSpec::universe() const {
  StrategyConfig c;
  c.class_overrides = class_overrides;
  c.defensive = defensive;
  std::vector<std::string> names = tickers;
  if (names.empty()) {
    names = default_universe_tickers();
    names.emplace_back("SPY");
  }
  return c.universe_for(names);
}

SynthSpec parse_synth_spec(std::istream& in, std::string_view source) {
  SynthSpec spec;
  spec.regimes[static_cast<std::size_t>(Regime::Bull)] = {0.0005, 0.008, 0.004};
  spec.regimes[static_cast<std::size_t>(Regime::Bear)] = {-0.0004, 0.012, 0.006};
  spec.regimes[static_cast<std::size_t>(Regime::Stress)] = {-0.004, 0.02, 0.008};

  for (const auto& kv : read_key_values(in, source)) {
    const std::string& key = kv.key;
    const std::string& value = kv.value;
    auto real = [&]() {
      const auto v = csv::to_double(value);
      if (!v) bad(source, kv.line, key, "not a number: '" + value + "'");
      return *v;
    };
    auto date = [&](std::string_view text) {
      const auto d = parse_date(csv::trim(text));
      if (!d) bad(source, kv.line, key, "bad date '" + std::string(text) + "'");
      return *d;
    };

    if (key == "seed") {
      const auto v = csv::to_int(value);
      if (!v || *v < 0) bad(source, kv.line, key, "expected a non-negative integer");
      spec.seed = static_cast<std::uint64_t>(*v);
    } else if (key == "start") {
      spec.start = date(value);
    } else if (key == "days") {
      const auto v = csv::to_int(value);
      if (!v || *v < 2) bad(source, kv.line, key, "expected an integer >= 2");
      spec.days = static_cast<int>(*v);
    } else if (key == "tickers") {
      spec.tickers = list_of(value);
      if (spec.tickers.empty()) bad(source, kv.line, key, "empty ticker list");
    } else if (key == "initial_price") {
      spec.initial_price = real();
      if (!(spec.initial_price > 0.0)) bad(source, kv.line, key, "must be positive");
    } else if (key == "event.defensive_drift") {
      spec.event_defensive_drift = real();
    } else if (key == "defensive") {
      spec.defensive = list_of(value);
    } else if (key == "schedule") {
      spec.schedule.clear();
      for (const auto& item : list_of(value)) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) bad(source, kv.line, key, "expected date:regime, got '" + item + "'");
        const auto r = regime_named(csv::trim(std::string_view(item).substr(colon + 1)));
        if (!r) bad(source, kv.line, key, "unknown regime in '" + item + "'");
        const Date d = date(std::string_view(item).substr(0, colon));
        if (!spec.schedule.empty() && !(spec.schedule.back().first < d)) bad(source, kv.line, key, "dates must ascend");
        spec.schedule.emplace_back(d, *r);
      }
    } else if (key == "events") {
      spec.events.clear();
      for (const auto& item : list_of(value)) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) bad(source, kv.line, key, "expected start:end, got '" + item + "'");
        const Date s = date(std::string_view(item).substr(0, colon));
        const Date e = date(std::string_view(item).substr(colon + 1));
        if (e < s) bad(source, kv.line, key, "event ends before it starts: '" + item + "'");
        spec.events.emplace_back(s, e);
      }
    } else if (key.rfind("class.", 0) == 0) {
      const auto c = asset_class_from_string(value);
      if (!c) bad(source, kv.line, key, "unknown asset class '" + value + "'");
      spec.class_overrides[key.substr(6)] = *c;
    } else if (key.rfind("regime.", 0) == 0 || key.rfind("group.", 0) == 0) {
      const auto parts = csv::split(key, '.');
      if (parts.size() != 3) bad(source, kv.line, key, "unknown key");
      const double v = real();
      if (parts[0] == "regime") {
        const auto r = regime_named(parts[1]);
        if (!r) bad(source, kv.line, key, "unknown regime");
        auto& p = spec.regimes[static_cast<std::size_t>(*r)];
        if (parts[2] == "factor_drift") p.factor_drift = v;
        else if (parts[2] == "factor_vol" && v >= 0.0) p.factor_vol = v;
        else if (parts[2] == "idio_vol" && v >= 0.0) p.idio_vol = v;
        else bad(source, kv.line, key, "unknown field or negative volatility");
      } else {
        const auto g = group_named(parts[1]);
        if (!g) bad(source, kv.line, key, "unknown group");
        auto& p = spec.groups[static_cast<std::size_t>(*g)];
        if (parts[2] == "beta") p.beta = v;
        else if (parts[2] == "drift") p.drift = v;
        else if (parts[2] == "vol_scale" && v >= 0.0) p.vol_scale = v;
        else bad(source, kv.line, key, "unknown field or negative scale");
      }
    } else {
      bad(source, kv.line, key, "unknown key");
    }
  }
  return spec;
}

SynthSpec load_synth_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open spec file " + path.string());
  return parse_synth_spec(in, path.string());
}

std::vector<Date> weekday_calendar(Date start, int days) {
  using namespace std::chrono;
  std::vector<Date> out;
  out.reserve(static_cast<std::size_t>(std::max(days, 0)));
  sys_days d{start};
  while (static_cast<int>(out.size()) < days) {
    const weekday wd{d};
    if (wd != Saturday && wd != Sunday) out.emplace_back(d);
    d += std::chrono::days{1};
  }
  return out;
}

std::vector<Regime> synth_regimes(const SynthSpec& spec, const std::vector<Date>& dates) {
  std::vector<Regime> out(dates.size(), Regime::Bull);
  std::size_t k = 0;
  Regime current = Regime::Bull;
  for (std::size_t t = 0; t < dates.size(); ++t) {
    while (k < spec.schedule.size() && !(dates[t] < spec.schedule[k].first)) current = spec.schedule[k++].second;
    out[t] = current;
    for (const auto& [s, e] : spec.events) {
      if (!(dates[t] < s) && !(e < dates[t])) out[t] = Regime::Stress;
    }
  }
  return out;
}

PriceTable synth_prices(const SynthSpec& spec) {
  if (spec.days < 800) throw ValidationError("synth: days must be at least 800, got " + std::to_string(spec.days));
  const AssetUniverse u = spec.universe();
  const std::size_t n = u.size();

  PriceTable table;
  table.tickers = u.tickers;
  table.dates = weekday_calendar(spec.start, spec.days);
  const std::vector<Regime> regimes = synth_regimes(spec, table.dates);
  std::vector<bool> in_event(table.dates.size(), false);
  for (std::size_t t = 0; t < table.dates.size(); ++t) {
    for (const auto& [s, e] : spec.events) {
      if (!(table.dates[t] < s) && !(e < table.dates[t])) in_event[t] = true;
    }
  }

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  table.prices.resize(static_cast<Eigen::Index>(table.dates.size()), static_cast<Eigen::Index>(n));
  std::vector<double> log_price(n, std::log(spec.initial_price));
  for (std::size_t i = 0; i < n; ++i) table.prices(0, static_cast<Eigen::Index>(i)) = spec.initial_price;
  for (std::size_t t = 1; t < table.dates.size(); ++t) {
    const RegimeParams& rp = spec.regimes[static_cast<std::size_t>(regimes[t])];
    const double factor = rp.factor_drift + rp.factor_vol * normal(rng);
    for (std::size_t i = 0; i < n; ++i) {
      const GroupParams& gp = spec.groups[static_cast<std::size_t>(u.group(i))];
      double r = gp.beta * factor + gp.drift + gp.vol_scale * rp.idio_vol * normal(rng);
      if (in_event[t] && u.defensive[i]) r += spec.event_defensive_drift;
      log_price[i] += r;
      table.prices(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i)) = std::exp(log_price[i]);
    }
  }
  return table;
}

}  // namespace rmats
