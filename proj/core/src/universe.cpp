#include "rmats/universe.hpp"

#include "rmats/error.hpp"

#include <algorithm>

namespace rmats {

std::string_view to_string(AssetClass c) {
  switch (c) {
    case AssetClass::UsEquity: return "us_equity";
    case AssetClass::IntlEquity: return "intl_equity";
    case AssetClass::FixedIncome: return "fixed_income";
    case AssetClass::Commodity: return "commodity";
  }
  return "invalid";
}

std::optional<AssetClass> asset_class_from_string(std::string_view s) {
  for (auto c : {AssetClass::UsEquity, AssetClass::IntlEquity, AssetClass::FixedIncome, AssetClass::Commodity}) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

std::string_view to_string(TemplateGroup g) {
  switch (g) {
    case TemplateGroup::UsEquity: return "us_equity";
    case TemplateGroup::IntlEquity: return "intl_equity";
    case TemplateGroup::FixedIncome: return "fixed_income";
    case TemplateGroup::Gold: return "gold";
    case TemplateGroup::Commodity: return "commodity";
  }
  return "invalid";
}

TemplateGroup AssetUniverse::group(std::size_t i) const {
  switch (classes[i]) {
    case AssetClass::UsEquity: return TemplateGroup::UsEquity;
    case AssetClass::IntlEquity: return TemplateGroup::IntlEquity;
    case AssetClass::FixedIncome: return TemplateGroup::FixedIncome;
    case AssetClass::Commodity: return defensive[i] ? TemplateGroup::Gold : TemplateGroup::Commodity;
  }
  return TemplateGroup::Commodity;
}

std::vector<std::size_t> AssetUniverse::members(AssetClass c) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < size(); ++i) {
    if (classes[i] == c) out.push_back(i);
  }
  return out;
}

Weights AssetUniverse::defensive_basket() const {
  const auto count = static_cast<double>(std::count(defensive.begin(), defensive.end(), true));
  if (count == 0) throw Error("universe has no defensive tickers");
  Vector w = Vector::Zero(static_cast<Eigen::Index>(size()));
  for (std::size_t i = 0; i < size(); ++i) {
    if (defensive[i]) w[static_cast<Eigen::Index>(i)] = 1.0 / count;
  }
  return Weights(std::move(w));
}

Weights AssetUniverse::from_group_fractions(const std::array<double, kTemplateGroupCount>& fractions) const {
  std::array<std::size_t, kTemplateGroupCount> counts{};
  for (std::size_t i = 0; i < size(); ++i) ++counts[static_cast<std::size_t>(group(i))];
  double covered = 0.0;
  for (std::size_t g = 0; g < kTemplateGroupCount; ++g) {
    if (counts[g] > 0) covered += fractions[g];
  }
  if (!(covered > 0.0)) return Weights::uniform(size());
  Vector w(static_cast<Eigen::Index>(size()));
  for (std::size_t i = 0; i < size(); ++i) {
    const auto g = static_cast<std::size_t>(group(i));
    w[static_cast<Eigen::Index>(i)] = fractions[g] / covered / static_cast<double>(counts[g]);
  }
  return Weights(std::move(w));
}

const std::map<std::string, AssetClass, std::less<>>& default_asset_classes() {
  static const std::map<std::string, AssetClass, std::less<>> classes = [] {
    std::map<std::string, AssetClass, std::less<>> m;
    for (const char* t : {"XLK", "XLE", "XLF", "XLV", "XLI", "XLP", "XLY", "XLU", "XLB", "XLRE", "SPY"}) {
      m.emplace(t, AssetClass::UsEquity);
    }
    for (const char* t : {"EWJ", "EWG", "EWU", "FXI", "EEM"}) m.emplace(t, AssetClass::IntlEquity);
    for (const char* t : {"TLT", "IEF", "LQD", "EMB"}) m.emplace(t, AssetClass::FixedIncome);
    for (const char* t : {"GLD", "SLV", "USO", "DBC"}) m.emplace(t, AssetClass::Commodity);
    return m;
  }();
  return classes;
}

const std::vector<std::string>& default_defensive_tickers() {
  static const std::vector<std::string> tickers{"TLT", "IEF", "LQD", "EMB", "GLD"};
  return tickers;
}

const std::vector<std::string>& default_universe_tickers() {
  static const std::vector<std::string> tickers{
      "XLK", "XLE", "XLF", "XLV", "XLI", "XLP", "XLY", "XLU", "XLB", "XLRE", "EWJ", "EWG",
      "EWU", "FXI", "EEM", "TLT", "IEF", "LQD", "EMB", "GLD", "SLV", "USO", "DBC"};
  return tickers;
}

}  // namespace rmats
