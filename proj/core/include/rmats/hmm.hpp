#pragma once

#include "rmats/core.hpp"

#include <cstdint>
#include <vector>

namespace rmats {

inline constexpr double kHmmVarianceFloor = 1e-8;

// Gaussian HMM with diagonal emissions.
struct HmmModel {
  int states = 0;
  int dim = 0;
  Vector initial;     // K
  Matrix transition;  // K x K, row-stochastic
  Matrix means;       // K x d
  Matrix variances;   // K x d, each >= kHmmVarianceFloor

  // Log density of observation `x` (length d) under every state.
  Vector log_emission(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
};

struct HmmFit {
  HmmModel model;
  std::vector<double> log_likelihood;  // one entry per E-step, in order
  int iterations = 0;
  bool converged = false;
};

// Baum-Welch on a T x d observation matrix. States are seeded from the
// terciles (K-tiles) of the first observation column; `seed` jitters the
// initial transition rows deterministically.
HmmFit hmm_fit(const Matrix& obs, int states = 3, std::uint64_t seed = 0, int max_iter = 200, double tol = 1e-6);

// Filtered posteriors P(S_t = k | O_1..t); row t uses only rows 0..t.
Matrix regime_posterior(const HmmModel& model, const Matrix& obs);

// Log-likelihood of the whole sequence under `model`.
double hmm_log_likelihood(const HmmModel& model, const Matrix& obs);

// State index -> regime: Stress has the largest first-dimension variance
// (ties: lower mean), then Bull has the higher mean of the remaining two.
std::vector<Regime> regime_label(const HmmModel& model);

}  // namespace rmats
