#include "rmats/kalman.hpp"

#include "rmats/error.hpp"

#include <cmath>

namespace rmats {

KalmanState kalman_fuse(const KalmanState& state, std::span<const double> observations) {
  if (observations.size() != state.r_obs.size()) throw Error("kalman_fuse: observation count does not match r_obs");
  if (!(state.p >= 0.0) || !(state.q > 0.0)) throw Error("kalman_fuse: invalid state variance or process noise");
  KalmanState next = state;
  next.p = state.p + state.q;
  for (std::size_t i = 0; i < observations.size(); ++i) {
    const double r = state.r_obs[i];
    if (!(r > 0.0)) throw Error("kalman_fuse: observation noise must be positive");
    if (!std::isfinite(observations[i])) throw Error("kalman_fuse: non-finite observation");
    const double gain = std::isinf(r) ? 0.0 : next.p / (next.p + r);
    next.z += gain * (observations[i] - next.z);
    next.p *= (1.0 - gain);
  }
  return next;
}

}  // namespace rmats
