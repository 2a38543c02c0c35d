#pragma once

#include "rmats/config.hpp"
#include "rmats/core.hpp"
#include "rmats/universe.hpp"

#include <limits>
#include <vector>

namespace rmats {

struct RewardParams {
  double lambda1 = 0.8;
  double lambda2 = 1.5;
  double theta = 0.05;
};

// r_t - lambda1 * sigma_t - lambda2 * max(0, dd_t - theta)
double reward(double r_t, double sigma_t, double dd_t, const RewardParams& p);

struct ExpectedReturns {
  Vector mu;  // per-asset expected daily return
};

struct OptConstraints {
  double risk_aversion = 5.0;
  double leverage_cap = 1.0;         // long-only simplex: ||w||_1 = 1 always
  std::vector<int> sector_of;        // asset -> sector index
  std::vector<double> sector_caps;   // per-sector maximum fraction
  Vector grs_vector;                 // per-asset geo sensitivity in [0,1]
  double gamma_geo = std::numeric_limits<double>::infinity();  // exposure budget; inf = inactive
};

struct OptimizerSettings {
  double step = 0.01;
  int iterations = 500;
  int projection_cycles = 100;
  double projection_tol = 1e-9;
};

struct OptimizeResult {
  Weights weights;
  std::vector<double> objective;  // objective after each iterate, starting with the initial point
};

// Daily-unit objective mu'w - lambda w'Sigma w.
double mv_objective(const Vector& mu, const Matrix& sigma, double risk_aversion, const Vector& w);

// Projected gradient ascent from equal weights. The gradient step is taken on
// the annualized objective (x252), which leaves the maximizer unchanged.
// Throws Error("infeasible") or Error("non-PSD sigma").
OptimizeResult optimize_traced(const ExpectedReturns& mu, const Matrix& sigma, const OptConstraints& cons,
                               const OptimizerSettings& settings = {});
Weights optimize(const ExpectedReturns& mu, const Matrix& sigma, const OptConstraints& cons,
                 const OptimizerSettings& settings = {});

// Euclidean projection onto {w >= 0, sum w = 1, per-sector sums <= caps}.
Vector project_capped_simplex(const Vector& v, const std::vector<int>& sector_of, const std::vector<double>& caps);

// Nearest feasible point under all constraints (Dykstra between the capped
// simplex and the geo half-space, then an exact feasibility pull if needed).
Vector project_feasible(const Vector& v, const OptConstraints& cons, const OptimizerSettings& settings);

// Smallest achievable w'grs under the simplex and sector caps, and its argmin.
std::pair<double, Vector> min_geo_exposure(const OptConstraints& cons, std::size_t n);

// Builds sector map, caps and geo sensitivities from config; gamma_geo set
// from the aggregate geo score as gamma0 * (1 - geo_tighten * mean_geo)
// unless `with_geo` is false.
OptConstraints make_constraints(const AssetUniverse& universe, const StrategyConfig& cfg, bool with_geo,
                                double mean_geo);
OptimizerSettings make_settings(const StrategyConfig& cfg);

// Expected returns: trailing mean daily log return shrunk toward zero.
ExpectedReturns estimate_mu(const Matrix& log_returns, int window, double shrink);

// Picks the risk aversion whose optimized portfolio earns the best mean
// shaped reward over the trailing window; ties go to the larger value.
double select_risk_aversion(const Matrix& log_returns, const std::vector<double>& candidates,
                            const OptConstraints& cons, const RewardParams& p, const StrategyConfig& cfg);

}  // namespace rmats
