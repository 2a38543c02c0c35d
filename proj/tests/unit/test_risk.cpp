#include "rmats/error.hpp"
#include "rmats/risk.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace rmats;

namespace {

// Tail mean over the k smallest values, k = floor((1 - alpha)(T - 1)) + 1.
std::pair<double, double> brute_tail(std::vector<double> x, double alpha) {
  std::sort(x.begin(), x.end());
  const auto k = static_cast<std::size_t>(std::floor((1.0 - alpha) * static_cast<double>(x.size() - 1) + 1e-9)) + 1;
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += x[i];
  return {-x[k - 1], -s / static_cast<double>(k)};
}

Matrix sample_correlated(const Matrix& cov, int T, std::uint64_t seed) {
  Eigen::LLT<Matrix> llt(cov);
  Matrix L = llt.matrixL();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  Matrix out(T, cov.rows());
  for (int t = 0; t < T; ++t) {
    Vector e(cov.rows());
    for (auto& v : e) v = z(rng);
    out.row(t) = (L * e).transpose();
  }
  return out;
}

}  // namespace

TEST_CASE("EWMA recursion matches a direct implementation") {
  auto t = testing::random_prices(testing::small_tickers(), 120, 5);
  Matrix r = log_returns(t);
  Matrix s = ewma_covariance(r, 0.94);
  Matrix oracle = Matrix::Zero(8, 8);
  Vector mean = r.topRows(30).colwise().mean().transpose();
  for (int i = 0; i < 30; ++i) {
    Vector d = r.row(i).transpose() - mean;
    oracle += d * d.transpose() / 29.0;
  }
  for (Eigen::Index i = 30; i < r.rows(); ++i) {
    Vector x = r.row(i).transpose();
    oracle = 0.94 * oracle + 0.06 * x * x.transpose();
  }
  oracle += 1e-10 * Matrix::Identity(8, 8);
  CHECK((s - oracle).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((s - s.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("EWMA covariance tracks the true covariance") {
  Matrix c(4, 4);
  c << 4, 1.2, 0.6, 0.2, 1.2, 2.25, 0.45, 0.15, 0.6, 0.45, 1, 0.1, 0.2, 0.15, 0.1, 0.25;
  c *= 1e-4;
  Matrix r = sample_correlated(c, 5000, 42);
  Matrix s = ewma_covariance(r, 0.94);
  CHECK((s - c).norm() < 0.15 * c.norm());
}

TEST_CASE("EWMA degenerate inputs and limits") {
  Matrix s = ewma_covariance(Matrix::Constant(100, 1, 0.0), 0.94);
  CHECK(s(0, 0) == doctest::Approx(kCovRidge).epsilon(1e-12));
  CHECK_THROWS_AS(ewma_covariance(Matrix::Zero(29, 2), 0.94), Error);

  auto t = testing::random_prices(testing::small_tickers(), 200, 9);
  Matrix r = log_returns(t);
  Matrix init = ewma_covariance(r.topRows(30), 0.94);
  Matrix near_one = ewma_covariance(r, 1.0 - 1e-12);
  CHECK((near_one - init).cwiseAbs().maxCoeff() <= 1e-12);

  for (Eigen::Index end = 30; end < r.rows(); end += 17) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(ewma_covariance(r.topRows(end), 0.94));
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
  }
}

TEST_CASE("historical CVaR examples") {
  std::vector<double> zeros(100, 0.0);
  auto z = historical_cvar(zeros, 0.95);
  CHECK(z.var == 0.0);
  CHECK(z.cvar == 0.0);

  std::vector<double> x(98, 0.01);
  x.push_back(-0.10);
  x.push_back(-0.05);
  auto t = historical_cvar(x, 0.95);
  CHECK(t.cvar == doctest::Approx(0.024).epsilon(1e-12));
  CHECK(t.var == doctest::Approx(-0.01));
  CHECK(t.alpha == 0.95);

  CHECK_THROWS_AS(historical_cvar(std::vector<double>(49, 0.0), 0.95), Error);
  CHECK_THROWS_AS(historical_cvar(zeros, 0.4), Error);
}

TEST_CASE("historical CVaR equals the brute-force tail mean") {
  std::mt19937_64 rng(1);
  std::student_t_distribution<double> heavy(3.0);
  std::uniform_int_distribution<int> len(50, 1000);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> x(static_cast<std::size_t>(len(rng)));
    for (auto& v : x) v = 0.01 * heavy(rng);
    const double alpha = trial % 2 == 0 ? 0.95 : 0.99;
    auto got = historical_cvar(x, alpha);
    auto [var, cvar] = brute_tail(x, alpha);
    CHECK(got.var == var);
    CHECK(got.cvar == cvar);
    CHECK(got.cvar >= got.var);
  }
}

TEST_CASE("Gaussian CVaR matches the analytic value") {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> n(0.0, 0.01);
  std::vector<double> x(1000000);
  for (auto& v : x) v = n(rng);
  const double phi = std::exp(-0.5 * 1.645 * 1.645) / std::sqrt(2.0 * std::numbers::pi);
  const double analytic = 0.01 * phi / 0.05;
  CHECK(analytic == doctest::Approx(0.02063).epsilon(1e-3));
  auto t = historical_cvar(x, 0.95);
  CHECK(std::abs(t.cvar - analytic) <= 0.02 * analytic);
}

TEST_CASE("circuit breaker") {
  RiskThresholds th;
  CHECK_FALSE(circuit_breaker(0, 0, 0, th));
  CHECK_FALSE(circuit_breaker(0.08, 0, 0, th));
  CHECK(circuit_breaker(0.0800001, 0, 0, th));
  CHECK(circuit_breaker(0.02, 0.9, 0.1, th));
  CHECK_FALSE(circuit_breaker(0.02, 0.75, 0.25, th));
  CHECK(circuit_breaker(0.0, 0.0, 0.26, th));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    double a = u(rng), b = u(rng), c = u(rng);
    if (circuit_breaker(a, b, c, th)) {
      CHECK(circuit_breaker(a + u(rng), b, c, th));
      CHECK(circuit_breaker(a, b + u(rng), c, th));
      CHECK(circuit_breaker(a, b, c + u(rng), th));
    }
  }
}

TEST_CASE("stress test losses") {
  Weights w{0.5, 0.5};
  std::vector<Scenario> s{{"zero", Vector::Zero(2)}, {"uniform", Vector::Constant(2, -0.1)},
                          {"mixed", Vector{{-0.2, 0.1}}}};
  auto loss = stress_test(w, s);
  CHECK(loss[0] == 0.0);
  CHECK(loss[1] == doctest::Approx(0.1));
  CHECK(loss[2] == doctest::Approx(0.05));
  CHECK(stress_test(Weights{0.9, 0.1}, {s[1]})[0] == doctest::Approx(0.1));

  Vector a{{-0.3, 0.2}}, b{{0.1, -0.05}};
  const double la = stress_test(w, {{"a", a}})[0], lb = stress_test(w, {{"b", b}})[0];
  CHECK(stress_test(w, {{"ab", 2.0 * a + b}})[0] == doctest::Approx(2.0 * la + lb));
  Weights w2{0.2, 0.8};
  const double l2 = stress_test(w2, {{"a", a}})[0];
  CHECK(stress_test(Weights{0.35, 0.65}, {{"a", a}})[0] == doctest::Approx(0.5 * la + 0.5 * l2));
  CHECK_THROWS_AS(stress_test(w, {{"bad", Vector::Zero(3)}}), Error);
}

TEST_CASE("scenario files") {
  std::istringstream in("scenario,B,A,EXTRA\nshock1,-0.1,0.05,9\nshock2,0,-0.2,1\n");
  auto s = read_scenarios(in, {"A", "B"}, "s.csv");
  REQUIRE(s.size() == 2);
  CHECK(s[0].name == "shock1");
  CHECK(s[0].shock[0] == 0.05);
  CHECK(s[0].shock[1] == -0.1);
  std::ostringstream out;
  write_scenarios(out, {"A", "B"}, s);
  std::istringstream back(out.str());
  auto again = read_scenarios(back, {"A", "B"});
  CHECK(again[1].shock == s[1].shock);

  std::istringstream missing("scenario,A\nx,0.1\n");
  CHECK_THROWS_AS(read_scenarios(missing, {"A", "B"}), ValidationError);
  std::istringstream bad("scenario,A,B\nx,0.1,abc\n");
  CHECK_THROWS_AS(read_scenarios(bad, {"A", "B"}), ValidationError);
}

TEST_CASE("scenario calibration picks the worst five-day move") {
  Matrix p = Matrix::Constant(40, 2, 100.0);
  for (int t = 20; t < 40; ++t) p(t, 0) = 80.0;
  for (int t = 15; t < 40; ++t) p(t, 1) = 100.0 + (t >= 18 ? -5.0 : 0.0);
  auto table = testing::make_table({"A", "B"}, p);
  std::vector<EventWindow> ev{{"drop", table.dates[10], table.dates[30]}, {"tiny", table.dates[5], table.dates[7]}};
  auto s = calibrate_scenarios(table, ev);
  REQUIRE(s.size() == 1);
  CHECK(s[0].name == "drop");
  CHECK(s[0].shock[0] == doctest::Approx(-0.2));
  CHECK(s[0].shock[1] == doctest::Approx(-0.05));
}

TEST_CASE("minimum variance closed form") {
  Matrix sigma = Vector{{0.04, 0.01}}.asDiagonal();
  OptConstraints cons;
  auto w = min_variance(sigma, cons, OptimizerSettings{});
  CHECK(w[0] == doctest::Approx(0.2).epsilon(1e-6));
  CHECK(w[1] == doctest::Approx(0.8).epsilon(1e-6));

  Matrix eq = 1e-4 * Matrix::Identity(5, 5);
  auto e = min_variance(eq, cons, OptimizerSettings{});
  for (std::size_t i = 0; i < 5; ++i) CHECK(e[i] == doctest::Approx(0.2).epsilon(1e-9));
}

TEST_CASE("risk proposal paths") {
  StrategyConfig cfg;
  auto t = testing::random_prices(testing::small_tickers(), 300, 4);
  auto u = cfg.universe_for(t.tickers);
  MarketContext ctx(u, cfg, t);
  ctx.holdings = Weights::uniform(8);

  RiskView view;
  view.sigma = 1e-4 * Matrix::Identity(8, 8);
  BroadcastMessage prior;
  prior.mean_geo = 0.0;
  auto m = risk_propose(ctx, &prior, view);
  CHECK_FALSE(m.circuit_breaker);
  for (std::size_t i = 0; i < 8; ++i) CHECK(m.weights[i] == doctest::Approx(0.125).epsilon(1e-9));
  CHECK(validate_message(m, 8).empty());
  CHECK(m.regime == Regime::Bull);
  {
    const Matrix r = log_returns(t).bottomRows(252);
    Vector pnl = (r.array().exp() - 1.0).matrix() * m.weights.values();
    auto tail = historical_cvar(std::vector<double>(pnl.data(), pnl.data() + pnl.size()), 0.95);
    CHECK(m.confidence == doctest::Approx(1.0 - std::min(1.0, tail.cvar / 0.03)));
  }

  view.breaker = true;
  auto b = risk_propose(ctx, nullptr, view);
  CHECK(b.circuit_breaker);
  CHECK(b.confidence == 1.0);
  CHECK(b.weights == u.defensive_basket());

  ctx.drawdown = 0.2;
  auto live = risk_view(ctx);
  CHECK(live.breaker);
  CHECK(live.sigma.rows() == 8);
  ctx.drawdown = 0.0;
  CHECK_FALSE(risk_view(ctx).breaker);
}
