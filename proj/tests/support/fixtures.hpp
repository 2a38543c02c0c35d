#pragma once

#include "rmats/config.hpp"
#include "rmats/market.hpp"
#include "rmats/price_table.hpp"
#include "rmats/synth.hpp"

#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace rmats::testing {

std::filesystem::path data_dir();
std::filesystem::path reference_spec_path();

// The bundled reference fixture (cached after the first call).
const PriceTable& reference_prices();

// Weekday table from 2020-01-01 with the given prices (rows x tickers).
PriceTable make_table(const std::vector<std::string>& tickers, const Matrix& prices);

// Random-walk prices with simple class structure, for agent-level tests.
PriceTable random_prices(const std::vector<std::string>& tickers, std::size_t rows, std::uint64_t seed,
                         double vol = 0.01);

// A compact 8-asset universe covering every asset class and template group.
const std::vector<std::string>& small_tickers();

// Fresh temporary directory under the system temp path.
std::filesystem::path temp_dir(const std::string& tag);

}  // namespace rmats::testing
