#pragma once

#include "rmats/core.hpp"

#include <span>
#include <vector>

namespace rmats {

// Random-walk scalar state observed by several noisy sources.
struct KalmanState {
  double z = 0.0;    // composite estimate
  double p = 1.0;    // estimate variance
  double q = 1e-4;   // process noise
  std::vector<double> r_obs;  // per-source observation noise
};

// One predict step followed by one sequential scalar update per source.
KalmanState kalman_fuse(const KalmanState& state, std::span<const double> observations);

}  // namespace rmats
