#include "rmats/backtest.hpp"
#include "rmats/hmm.hpp"
#include "rmats/optimizer.hpp"
#include "rmats/synth.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace rmats;

namespace {

const PriceTable& reference() {
  static const PriceTable p = synth_prices(load_synth_spec(RMATS_DATA_DIR "/reference_synth.cfg"));
  return p;
}

void BM_HmmFit(benchmark::State& state) {
  const auto T = static_cast<int>(state.range(0));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z(0.0, 1.0);
  Matrix obs(T, 2);
  for (int t = 0; t < T; ++t) {
    const double scale = (t / 60) % 3 == 2 ? 3.0 : 1.0;
    obs(t, 0) = 0.01 * scale * z(rng);
    obs(t, 1) = 0.01 * scale + 0.001 * z(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(hmm_fit(obs, 3, 0, 200, 1e-6));
}
BENCHMARK(BM_HmmFit)->Arg(252)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_Optimize(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(2);
  std::normal_distribution<double> z(0.0, 1.0);
  ExpectedReturns mu{Vector(n)};
  for (auto& m : mu.mu) m = 0.001 * z(rng);
  Matrix a(n, n);
  for (auto& x : a.reshaped()) x = z(rng);
  const Matrix sigma = 1e-4 * a * a.transpose() / n;
  OptConstraints cons;
  for (int i = 0; i < n; ++i) cons.sector_of.push_back(i % 4);
  cons.sector_caps = {0.4, 0.4, 0.4, 0.4};
  cons.grs_vector = Vector::LinSpaced(n, 0.0, 1.0);
  cons.gamma_geo = 0.4;
  for (auto _ : state) benchmark::DoNotOptimize(optimize(mu, sigma, cons));
}
BENCHMARK(BM_Optimize)->Arg(8)->Arg(24)->Unit(benchmark::kMicrosecond);

void BM_Backtest(benchmark::State& state, const char* strategy) {
  const auto& prices = reference();
  StrategyConfig cfg;
  for (auto _ : state) {
    auto s = make_strategy(strategy, cfg);
    benchmark::DoNotOptimize(run_backtest(*s, prices, cfg));
  }
}
BENCHMARK_CAPTURE(BM_Backtest, equal_weight, "equal_weight")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Backtest, rmats, "rmats")->Unit(benchmark::kMillisecond)->Iterations(1);

}  // namespace

BENCHMARK_MAIN();
