#include "rmats/price_table.hpp"

#include "rmats/csv.hpp"
#include "rmats/error.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace rmats {

std::optional<Date> parse_date(std::string_view text) {
  text = csv::trim(text);
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  auto digits = [&](std::size_t pos, std::size_t len, int& out) {
    out = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
      if (text[i] < '0' || text[i] > '9') return false;
      out = out * 10 + (text[i] - '0');
    }
    return true;
  };
  int y = 0, m = 0, d = 0;
  if (!digits(0, 4, y) || !digits(5, 2, m) || !digits(8, 2, d)) return std::nullopt;
  const Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                  std::chrono::day{static_cast<unsigned>(d)}};
  if (!date.ok()) return std::nullopt;
  return date;
}

std::string format_date(const Date& d) {
  std::array<char, 16> buf{};
  std::snprintf(buf.data(), buf.size(), "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf.data();
}

std::string format_number(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::fixed);
  if (ec != std::errc()) {
    // Magnitudes beyond the fixed-format buffer fall back to general notation.
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), res.ptr);
  }
  return std::string(buf.data(), ptr);
}

PriceTable PriceTable::head(std::size_t end) const { return slice(0, end); }

PriceTable PriceTable::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > rows()) throw Error("PriceTable::slice out of range");
  PriceTable out;
  out.dates.assign(dates.begin() + static_cast<std::ptrdiff_t>(begin),
                   dates.begin() + static_cast<std::ptrdiff_t>(end));
  out.tickers = tickers;
  out.prices = prices.middleRows(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(end - begin));
  return out;
}

PriceTable PriceTable::select_columns(const std::vector<std::size_t>& columns) const {
  PriceTable out;
  out.dates = dates;
  out.prices.resize(prices.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    out.tickers.push_back(tickers.at(columns[j]));
    out.prices.col(static_cast<Eigen::Index>(j)) = prices.col(static_cast<Eigen::Index>(columns[j]));
  }
  return out;
}

std::size_t PriceTable::lower_bound(const Date& d) const {
  return static_cast<std::size_t>(std::lower_bound(dates.begin(), dates.end(), d) - dates.begin());
}

std::optional<std::size_t> PriceTable::column_of(std::string_view ticker) const {
  for (std::size_t j = 0; j < tickers.size(); ++j) {
    if (tickers[j] == ticker) return j;
  }
  return std::nullopt;
}

namespace {

void check_positive(const PriceTable& p) {
  if (p.rows() < 2) throw Error("log_returns: need at least 2 rows");
  if (!p.prices.allFinite() || (p.prices.array() <= 0.0).any()) throw Error("invalid price");
}

}  // namespace

Matrix log_returns(const PriceTable& p) {
  check_positive(p);
  const Eigen::Index t = p.prices.rows() - 1;
  return (p.prices.bottomRows(t).array() / p.prices.topRows(t).array()).log().matrix();
}

Matrix simple_returns(const PriceTable& p) {
  check_positive(p);
  const Eigen::Index t = p.prices.rows() - 1;
  return (p.prices.bottomRows(t).array() / p.prices.topRows(t).array() - 1.0).matrix();
}

PriceTable read_price_table(std::istream& in, std::string_view source) {
  const std::string where(source);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(where + ": empty price file");
  csv::normalize_line(line, true);
  auto header = csv::split(line);
  if (header.size() < 2 || csv::trim(header[0]) != "date") {
    throw ValidationError(where + ": line 1: malformed header (expected `date,<T1>,...`)");
  }
  PriceTable table;
  for (std::size_t j = 1; j < header.size(); ++j) {
    std::string ticker(csv::trim(header[j]));
    if (ticker.empty()) {
      throw ValidationError(where + ": line 1, column " + std::to_string(j + 1) + ": empty ticker");
    }
    for (const auto& existing : table.tickers) {
      if (existing == ticker) throw ValidationError(where + ": line 1: duplicate ticker " + ticker);
    }
    table.tickers.push_back(std::move(ticker));
  }
  const std::size_t n = table.tickers.size();

  std::vector<std::vector<double>> cells;
  std::vector<std::vector<bool>> present;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    csv::normalize_line(line, false);
    if (csv::trim(line).empty()) continue;
    auto fields = csv::split(line);
    const std::size_t row = table.dates.size();
    const std::string loc = where + ": line " + std::to_string(line_no) + " (row " + std::to_string(row) + ")";
    if (fields.size() != n + 1) {
      throw ValidationError(loc + ": expected " + std::to_string(n + 1) + " fields, got " +
                            std::to_string(fields.size()));
    }
    auto date = parse_date(fields[0]);
    if (!date) throw ValidationError(loc + ", column 1: unparseable date '" + fields[0] + "'");
    if (!table.dates.empty() && !(table.dates.back() < *date)) {
      throw ValidationError(loc + ": dates not strictly ascending at " + format_date(*date));
    }
    table.dates.push_back(*date);
    std::vector<double> values(n, 0.0);
    std::vector<bool> has(n, false);
    for (std::size_t j = 0; j < n; ++j) {
      const auto text = csv::trim(fields[j + 1]);
      if (text.empty()) continue;
      double v = 0.0;
      if (!csv::parse_double(text, v)) {
        throw ValidationError(loc + ", column " + std::to_string(j + 2) + " (" + table.tickers[j] +
                              "): unparseable cell '" + std::string(text) + "'");
      }
      if (!(v > 0.0)) {
        throw ValidationError(loc + ", column " + std::to_string(j + 2) + " (" + table.tickers[j] +
                              "): invalid price " + std::string(text));
      }
      values[j] = v;
      has[j] = true;
    }
    cells.push_back(std::move(values));
    present.push_back(std::move(has));
  }
  if (table.dates.empty()) throw ValidationError(where + ": no data rows");

  const std::size_t rows = table.dates.size();
  table.prices.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    std::optional<std::size_t> first;
    for (std::size_t t = 0; t < rows && !first; ++t) {
      if (present[t][j]) first = t;
    }
    if (!first) throw ValidationError(where + ": column " + table.tickers[j] + " is entirely missing");
    double last = cells[*first][j];
    for (std::size_t t = 0; t < rows; ++t) {
      if (present[t][j]) last = cells[t][j];
      table.prices(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = last;
    }
  }
  return table;
}

PriceTable load_price_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open price file " + path.string());
  return read_price_table(in, path.string());
}

void write_price_table(std::ostream& out, const PriceTable& p) {
  out << "date";
  for (const auto& t : p.tickers) out << ',' << t;
  out << '\n';
  for (std::size_t i = 0; i < p.rows(); ++i) {
    out << format_date(p.dates[i]);
    for (std::size_t j = 0; j < p.cols(); ++j) {
      out << ',' << format_number(p.prices(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    out << '\n';
  }
}

}  // namespace rmats
