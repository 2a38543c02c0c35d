#pragma once

#include "rmats/config.hpp"
#include "rmats/price_table.hpp"
#include "rmats/universe.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rmats {

struct RegimeParams {
  double factor_drift = 0.0;  // daily log drift of the common factor
  double factor_vol = 0.0;
  double idio_vol = 0.0;
};

struct GroupParams {
  double beta = 1.0;
  double drift = 0.0;
  double vol_scale = 1.0;  // multiplies idiosyncratic vol
};

struct SynthSpec {
  std::uint64_t seed = 42;
  Date start{std::chrono::year{2021}, std::chrono::January, std::chrono::day{4}};
  int days = 1105;
  std::vector<std::string> tickers;  // empty: the default ETF universe plus SPY
  double initial_price = 100.0;
  std::array<RegimeParams, 3> regimes{};            // indexed by Regime
  std::array<GroupParams, kTemplateGroupCount> groups{};  // indexed by TemplateGroup
  std::vector<std::pair<Date, Regime>> schedule;    // regime in force from each date on; bull before the first
  std::vector<std::pair<Date, Date>> events;        // forced stress windows, inclusive
  double event_defensive_drift = 0.0;               // extra daily drift of defensive assets inside events
  std::map<std::string, AssetClass, std::less<>> class_overrides;
  std::optional<std::vector<std::string>> defensive;

  AssetUniverse universe() const;
};

// Parses the key=value spec; throws ValidationError naming the key.
SynthSpec parse_synth_spec(std::istream& in, std::string_view source = "<stream>");
SynthSpec load_synth_spec(const std::filesystem::path& path);

// Weekday calendar starting at spec.start (moved to the next weekday).
std::vector<Date> weekday_calendar(Date start, int days);

// Regime in force on each calendar day (events override the schedule).
std::vector<Regime> synth_regimes(const SynthSpec& spec, const std::vector<Date>& dates);

// One-factor regime-conditional log returns; deterministic per seed.
// Throws ValidationError when spec.days < 800.
PriceTable synth_prices(const SynthSpec& spec);

}  // namespace rmats
