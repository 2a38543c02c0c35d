#pragma once

#include "rmats/core.hpp"

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rmats {

using Date = std::chrono::year_month_day;

// Strict ISO-8601 calendar date `YYYY-MM-DD`.
std::optional<Date> parse_date(std::string_view text);
std::string format_date(const Date& d);

// Shortest round-trip fixed-notation rendering (no exponent, '.' decimal).
std::string format_number(double value);

// Date-aligned adjusted closes; rows = dates, columns = tickers.
struct PriceTable {
  std::vector<Date> dates;
  std::vector<std::string> tickers;
  Matrix prices;

  std::size_t rows() const { return dates.size(); }
  std::size_t cols() const { return tickers.size(); }

  // Rows [0, end) as an independent table.
  PriceTable head(std::size_t end) const;
  // Rows [begin, end).
  PriceTable slice(std::size_t begin, std::size_t end) const;
  PriceTable select_columns(const std::vector<std::size_t>& columns) const;

  // First row whose date is >= d, or rows() if none.
  std::size_t lower_bound(const Date& d) const;
  std::optional<std::size_t> column_of(std::string_view ticker) const;
};

// Row t holds ln(p_t / p_{t-1}); throws Error("invalid price") on a
// non-positive entry and Error on fewer than two rows.
Matrix log_returns(const PriceTable& p);
// Simple returns p_t / p_{t-1} - 1 with the same shape and checks.
Matrix simple_returns(const PriceTable& p);

// Canonical price file. Missing cells are forward-filled; a leading gap is
// back-filled from the first observation. Errors are ValidationError with the
// file line and column named.
PriceTable read_price_table(std::istream& in, std::string_view source = "<stream>");
PriceTable load_price_table(const std::filesystem::path& path);
void write_price_table(std::ostream& out, const PriceTable& p);

}  // namespace rmats
