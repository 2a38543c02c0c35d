#include "rmats/market.hpp"

#include "rmats/error.hpp"

namespace rmats {

MarketContext::MarketContext(const AssetUniverse& u, const StrategyConfig& c, PriceTable p)
    : universe(u), config(c), prices(std::move(p)) {
  if (prices.cols() != universe.size()) throw Error("MarketContext: price columns do not match universe");
  if (prices.rows() >= 2) returns = log_returns(prices);
  day = static_cast<long>(prices.rows()) - 1;
  holdings = Weights::uniform(universe.size());
}

}  // namespace rmats
