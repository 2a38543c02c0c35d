#include "rmats/error.hpp"
#include "rmats/sentiment.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace rmats;

namespace {

PanelData panel_2x2(double ctrl_pre, double ctrl_post, double treat_pre, double treat_post) {
  PanelData p;
  p.outcomes.resize(2, 2);
  p.outcomes << ctrl_pre, ctrl_post, treat_pre, treat_post;
  p.treated = {false, true};
  p.post = {false, true};
  return p;
}

PanelData injected_panel(double delta, double sigma, std::uint64_t seed) {
  const int units = 50, periods = 40;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  std::normal_distribution<double> effect(0.0, 0.05);
  PanelData p;
  p.outcomes.resize(units, periods);
  p.treated.resize(units);
  p.post.resize(periods);
  std::vector<double> unit_fx(units), time_fx(periods);
  for (auto& x : unit_fx) x = effect(rng);
  for (auto& x : time_fx) x = effect(rng);
  for (int i = 0; i < units; ++i) p.treated[i] = i % 2 == 0;
  for (int t = 0; t < periods; ++t) p.post[t] = t >= 25;
  for (int i = 0; i < units; ++i) {
    for (int t = 0; t < periods; ++t) {
      p.outcomes(i, t) = 0.1 + unit_fx[i] + time_fx[t] + (p.treated[i] && p.post[t] ? delta : 0.0) + noise(rng);
    }
  }
  return p;
}

// OLS on [1, D, T, D*T] via the normal equations.
std::pair<Vector, double> ols_interaction(const PanelData& p) {
  const auto units = p.outcomes.rows(), periods = p.outcomes.cols();
  Matrix x(units * periods, 4);
  Vector y(units * periods);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < units; ++i) {
    for (Eigen::Index t = 0; t < periods; ++t, ++k) {
      const double d = p.treated[i] ? 1 : 0, tt = p.post[t] ? 1 : 0;
      x.row(k) << 1.0, d, tt, d * tt;
      y[k] = p.outcomes(i, t);
    }
  }
  Matrix xtx = x.transpose() * x;
  Vector beta = xtx.ldlt().solve(x.transpose() * y);
  Vector resid = y - x * beta;
  const double s2 = resid.squaredNorm() / static_cast<double>(x.rows() - 4);
  Matrix inv = xtx.inverse();
  return {beta, std::sqrt(s2 * inv(3, 3))};
}

// Prices for small_tickers() whose last `tail` days see defensives rally and
// equities fall by `shift` per day.
PriceTable stressed_prices(std::size_t rows, std::size_t tail, double shift, std::uint64_t seed = 21) {
  auto t = testing::random_prices(testing::small_tickers(), rows, seed);
  StrategyConfig cfg;
  auto u = cfg.universe_for(t.tickers);
  for (std::size_t r = rows - tail; r < rows; ++r) {
    for (std::size_t j = 0; j < u.size(); ++j) {
      double step = u.defensive[j] ? shift : (u.is_equity(j) ? -shift : 0.0);
      const auto jj = static_cast<Eigen::Index>(j);
      for (std::size_t q = r; q < rows; ++q) t.prices(static_cast<Eigen::Index>(q), jj) *= std::exp(step);
    }
  }
  return t;
}

}  // namespace

TEST_CASE("DiD on a constant panel") {
  auto p = panel_2x2(0.7, 0.7, 0.7, 0.7);
  auto r = did_estimate(p);
  CHECK(r.delta == 0.0);
  CHECK(r.alpha == 0.7);
  CHECK(r.delta_se >= 0.0);
}

TEST_CASE("DiD 2x2 double difference") {
  auto r = did_estimate(panel_2x2(0.0, 0.1, 0.0, -0.3));
  CHECK(r.delta == doctest::Approx(-0.4).epsilon(1e-12));
  CHECK(r.alpha == 0.0);
  CHECK(r.beta == 0.0);
  CHECK(r.gamma == doctest::Approx(0.1));

  auto q = did_estimate(panel_2x2(1.0, 2.5, 0.5, 4.0));
  CHECK(q.delta == doctest::Approx((4.0 - 0.5) - (2.5 - 1.0)).epsilon(1e-14));
  CHECK(q.alpha == 1.0);
  CHECK(q.beta == doctest::Approx(-0.5));
  CHECK(q.gamma == doctest::Approx(1.5));
}

TEST_CASE("DiD recovers an injected effect") {
  for (std::uint64_t seed : {1u, 2u, 3u, 99u}) {
    auto r = did_estimate(injected_panel(0.5, 0.01, seed));
    CHECK(r.delta >= 0.48);
    CHECK(r.delta <= 0.52);
  }
}

TEST_CASE("DiD coefficients and standard error match OLS") {
  auto p = injected_panel(0.3, 0.2, 8);
  auto r = did_estimate(p);
  auto [beta, se] = ols_interaction(p);
  CHECK(r.alpha == doctest::Approx(beta[0]).epsilon(1e-10));
  CHECK(r.beta == doctest::Approx(beta[1]).epsilon(1e-10));
  CHECK(r.gamma == doctest::Approx(beta[2]).epsilon(1e-10));
  CHECK(r.delta == doctest::Approx(beta[3]).epsilon(1e-10));
  CHECK(r.delta_se == doctest::Approx(se).epsilon(1e-8));
}

TEST_CASE("DiD shift invariance and scale equivariance") {
  auto p = injected_panel(0.2, 0.05, 4);
  auto base = did_estimate(p);
  auto shifted = p;
  shifted.outcomes.array() += 3.25;
  CHECK(did_estimate(shifted).delta == doctest::Approx(base.delta).epsilon(1e-10));
  auto scaled = p;
  scaled.outcomes *= -2.5;
  CHECK(did_estimate(scaled).delta == doctest::Approx(-2.5 * base.delta).epsilon(1e-10));
  CHECK(did_estimate(scaled).delta_se == doctest::Approx(2.5 * base.delta_se).epsilon(1e-10));
}

TEST_CASE("DiD degenerate panels") {
  auto p = panel_2x2(0, 0, 0, 0);
  p.treated = {false, false};
  CHECK_THROWS_WITH_AS(did_estimate(p), "degenerate panel", Error);
  p = panel_2x2(0, 0, 0, 0);
  p.post = {true, true};
  CHECK_THROWS_WITH_AS(did_estimate(p), "degenerate panel", Error);
}

TEST_CASE("event panel assigns treatment by trailing return") {
  Matrix r = Matrix::Zero(30, 4);
  for (int t = 0; t < 20; ++t) {
    r(t, 0) = -0.01;
    r(t, 1) = -0.02;
    r(t, 2) = 0.01;
    r(t, 3) = 0.02;
  }
  auto panel = event_panel(r, 20, 20);
  REQUIRE(panel.has_value());
  CHECK(panel->treated == std::vector<bool>{true, true, false, false});
  CHECK(panel->outcomes.cols() == 30);
  CHECK(panel->outcomes(1, 0) == doctest::Approx(-2.0));
  CHECK(std::count(panel->post.begin(), panel->post.end(), true) == 10);
  CHECK_FALSE(event_panel(r, 5, 20).has_value());
  CHECK_FALSE(event_panel(Matrix::Zero(30, 4), 20, 20).has_value());
}

TEST_CASE("geo risk score basics") {
  StrategyConfig cfg;
  auto u = cfg.universe_for(testing::small_tickers());
  CHECK(geo_risk_score(Matrix::Zero(300, 8), u, false, std::nullopt, cfg) == 0.5);
  CHECK_THROWS_WITH_AS(geo_risk_score(Matrix::Zero(9, 8), u, false, std::nullopt, cfg), "insufficient history",
                       Error);

  GrsCoefficients coef;
  CHECK(geo_risk_from_components({50.0, 0.0}, false, std::nullopt, coef) == doctest::Approx(1.0));
  CHECK(geo_risk_from_components({-50.0, 0.0}, false, std::nullopt, coef) == doctest::Approx(0.0));
  DiDResult did;
  did.delta = -0.4;
  const double with = geo_risk_from_components({0.1, -0.2}, true, did, coef);
  CHECK(with == doctest::Approx(1.0 / (1.0 + std::exp(-(0.1 - 0.1 + 2.0 * 0.4)))));
  CHECK(geo_risk_from_components({0.1, -0.2}, false, did, coef) == doctest::Approx(0.5));
  coef.c = 0.0;
  CHECK(geo_risk_from_components({0.1, -0.2}, true, did, coef) == doctest::Approx(0.5));
}

TEST_CASE("geo risk components against a direct computation") {
  StrategyConfig cfg;
  auto t = testing::random_prices(testing::small_tickers(), 200, 31);
  auto u = cfg.universe_for(t.tickers);
  Matrix r = log_returns(t);
  auto z = geo_risk_components(r, u, 20, 100);
  // Defensive: TLT IEF GLD; equity: XLK XLF EWJ EEM.
  std::vector<double> s, v;
  for (Eigen::Index i = 0; i < r.rows(); ++i) {
    s.push_back((r(i, 4) + r(i, 5) + r(i, 6)) / 3.0 - (r(i, 0) + r(i, 1) + r(i, 2) + r(i, 3)) / 4.0);
    const double m = r.row(i).mean();
    v.push_back(std::sqrt((r.row(i).array() - m).square().sum() / 8.0));
  }
  auto mean = [](const std::vector<double>& x, std::size_t a, std::size_t b) {
    double acc = 0;
    for (std::size_t i = a; i < b; ++i) acc += x[i];
    return acc / static_cast<double>(b - a);
  };
  auto sd = [&](const std::vector<double>& x, std::size_t a, std::size_t b) {
    const double m = mean(x, a, b);
    double acc = 0;
    for (std::size_t i = a; i < b; ++i) acc += (x[i] - m) * (x[i] - m);
    return std::sqrt(acc / static_cast<double>(b - a));
  };
  const std::size_t n = s.size();
  const double zs = (mean(s, n - 20, n) - mean(s, n - 120, n - 20)) * std::sqrt(20.0) / sd(s, n - 120, n - 20);
  const double zv = (mean(v, n - 20, n) - mean(v, n - 120, n - 20)) / sd(v, n - 120, n - 20);
  CHECK(z.z_spread == doctest::Approx(zs).epsilon(1e-10));
  CHECK(z.z_vol == doctest::Approx(zv).epsilon(1e-10));
}

TEST_CASE("geo risk is non-decreasing in the defensive spread") {
  StrategyConfig cfg;
  cfg.grs_b = 0.0;
  auto u = cfg.universe_for(testing::small_tickers());
  double last = -1.0;
  for (double shift : {-0.004, -0.002, 0.0, 0.001, 0.002, 0.004, 0.008}) {
    Matrix r = log_returns(stressed_prices(300, 20, shift));
    const double g = geo_risk_score(r, u, false, std::nullopt, cfg);
    CHECK(g >= last);
    last = g;
  }
  CHECK(last > 0.99);
}

TEST_CASE("geo risk golden value on the reference fixture") {
  const auto& ref = testing::reference_prices();
  StrategyConfig cfg;
  auto u = cfg.universe_for(ref.tickers);
  const auto row = ref.lower_bound(*parse_date("2022-03-15"));
  Matrix r = log_returns(ref.head(row + 1));
  const double g = geo_risk_score(r, u, false, std::nullopt, cfg);
  CHECK(g == doctest::Approx(0.98718500041802348).epsilon(1e-9));
}

TEST_CASE("sentiment proposal endpoints") {
  StrategyConfig cfg;
  cfg.grs_a = 200.0;
  cfg.grs_b = 0.0;
  {
    auto t = stressed_prices(300, 20, 0.01);
    auto u = cfg.universe_for(t.tickers);
    MarketContext ctx(u, cfg, t);
    auto m = sentiment_propose(ctx, nullptr);
    CHECK(m.geo_risk == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.regime == Regime::Stress);
    CHECK(m.confidence == doctest::Approx(1.0));
    CHECK((m.weights.values() - u.defensive_basket().values()).lpNorm<Eigen::Infinity>() <= 1e-9);
    CHECK(m.delta == 0.0);
    CHECK(validate_message(m, u.size()).empty());
  }
  {
    auto t = stressed_prices(300, 20, -0.01);
    auto u = cfg.universe_for(t.tickers);
    MarketContext ctx(u, cfg, t);
    auto m = sentiment_propose(ctx, nullptr);
    CHECK(m.geo_risk == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(m.regime == Regime::Bull);
    CHECK((m.weights.values() - Vector::Constant(8, 0.125)).lpNorm<Eigen::Infinity>() <= 1e-9);
  }
  {
    Matrix flat = Matrix::Constant(100, 8, 50.0);
    auto t = testing::make_table(testing::small_tickers(), flat);
    auto u = cfg.universe_for(t.tickers);
    MarketContext ctx(u, cfg, t);
    auto m = sentiment_propose(ctx, nullptr);
    CHECK(m.geo_risk == 0.5);
    CHECK(m.regime == Regime::Bull);
    CHECK(m.confidence == doctest::Approx(0.3));
    Vector mid = 0.5 * Vector::Constant(8, 0.125) + 0.5 * u.defensive_basket().values();
    CHECK((m.weights.values() - mid).lpNorm<Eigen::Infinity>() <= 1e-12);
    CHECK(m.weights.on_simplex());

    AgentMessage prev = m;
    prev.weights = Weights::uniform(8);
    auto again = sentiment_propose(ctx, nullptr, &prev);
    CHECK(again.delta == doctest::Approx(l2_distance(again.weights, prev.weights)));
  }
  {
    auto t = testing::random_prices(testing::small_tickers(), 59, 3);
    auto u = cfg.universe_for(t.tickers);
    MarketContext ctx(u, cfg, t);
    CHECK_THROWS_AS(sentiment_propose(ctx, nullptr), Error);
  }
}

TEST_CASE("sentiment proposals stay on the simplex") {
  StrategyConfig cfg;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto t = testing::random_prices(testing::small_tickers(), 120, seed, 0.02);
    auto u = cfg.universe_for(t.tickers);
    MarketContext ctx(u, cfg, t);
    auto m = sentiment_propose(ctx, nullptr);
    CHECK(validate_message(m, 8).empty());
  }
}
