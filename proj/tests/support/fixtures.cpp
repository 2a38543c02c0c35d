#include "fixtures.hpp"

#include <atomic>
#include <chrono>
#include <cmath>

#ifndef RMATS_DATA_DIR
#error "RMATS_DATA_DIR must be defined"
#endif

namespace rmats::testing {

std::filesystem::path data_dir() { return RMATS_DATA_DIR; }

std::filesystem::path reference_spec_path() { return data_dir() / "reference_synth.cfg"; }

const PriceTable& reference_prices() {
  static const PriceTable table = synth_prices(load_synth_spec(reference_spec_path()));
  return table;
}

PriceTable make_table(const std::vector<std::string>& tickers, const Matrix& prices) {
  PriceTable t;
  t.tickers = tickers;
  t.dates = weekday_calendar(Date{std::chrono::year{2020}, std::chrono::January, std::chrono::day{1}},
                             static_cast<int>(prices.rows()));
  t.prices = prices;
  return t;
}

PriceTable random_prices(const std::vector<std::string>& tickers, std::size_t rows, std::uint64_t seed, double vol) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix p(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(tickers.size()));
  for (Eigen::Index j = 0; j < p.cols(); ++j) p(0, j) = 100.0;
  for (Eigen::Index t = 1; t < p.rows(); ++t) {
    const double f = vol * n(rng);
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
      const double beta = 0.5 + 0.1 * static_cast<double>(j % 5);
      p(t, j) = p(t - 1, j) * std::exp(0.0002 + beta * f + vol * 0.5 * n(rng));
    }
  }
  return make_table(tickers, p);
}

const std::vector<std::string>& small_tickers() {
  static const std::vector<std::string> t{"XLK", "XLF", "EWJ", "EEM", "TLT", "IEF", "GLD", "USO"};
  return t;
}

std::filesystem::path temp_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
  auto dir = std::filesystem::temp_directory_path() /
             ("rmats_" + tag + "_" + std::to_string(stamp) + "_" + std::to_string(counter++));
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace rmats::testing
