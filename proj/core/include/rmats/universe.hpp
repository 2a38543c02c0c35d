#pragma once

#include "rmats/core.hpp"

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rmats {

// Sector buckets used for caps and geo sensitivities.
enum class AssetClass : std::uint8_t { UsEquity = 0, IntlEquity = 1, FixedIncome = 2, Commodity = 3 };
inline constexpr std::size_t kAssetClassCount = 4;

std::string_view to_string(AssetClass c);
std::optional<AssetClass> asset_class_from_string(std::string_view s);

// Template groups split the commodity bucket into defensive (gold) and other.
enum class TemplateGroup : std::uint8_t { UsEquity = 0, IntlEquity = 1, FixedIncome = 2, Gold = 3, Commodity = 4 };
inline constexpr std::size_t kTemplateGroupCount = 5;

std::string_view to_string(TemplateGroup g);

struct AssetUniverse {
  std::vector<std::string> tickers;
  std::vector<AssetClass> classes;
  std::vector<bool> defensive;

  std::size_t size() const { return tickers.size(); }
  TemplateGroup group(std::size_t i) const;
  bool is_equity(std::size_t i) const {
    return classes[i] == AssetClass::UsEquity || classes[i] == AssetClass::IntlEquity;
  }

  std::vector<std::size_t> members(AssetClass c) const;

  // Equal split over the defensive tickers; throws if there are none.
  Weights defensive_basket() const;

  // Group-level fractions split equally inside each group; groups absent from
  // the universe have their share redistributed proportionally.
  Weights from_group_fractions(const std::array<double, kTemplateGroupCount>& fractions) const;
};

// The 24-ETF evaluation universe plus the SPY benchmark.
const std::map<std::string, AssetClass, std::less<>>& default_asset_classes();
const std::vector<std::string>& default_defensive_tickers();
const std::vector<std::string>& default_universe_tickers();

}  // namespace rmats
