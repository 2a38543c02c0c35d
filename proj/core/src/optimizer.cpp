#include "rmats/optimizer.hpp"

#include "rmats/error.hpp"
#include "rmats/risk.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace rmats {

double reward(double r_t, double sigma_t, double dd_t, const RewardParams& p) {
  return r_t - p.lambda1 * sigma_t - p.lambda2 * std::max(0.0, dd_t - p.theta);
}

double mv_objective(const Vector& mu, const Matrix& sigma, double risk_aversion, const Vector& w) {
  return mu.dot(w) - risk_aversion * w.dot(sigma * w);
}

namespace {

constexpr double kAnnualization = 252.0;

// Projection of u onto {x >= 0, sum x = total}.
Vector project_scaled_simplex(const Vector& u, double total) {
  if (total <= 0.0) return Vector::Zero(u.size());
  std::vector<double> sorted(u.data(), u.data() + u.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double tau = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    cumulative += sorted[k];
    const double candidate = (cumulative - total) / static_cast<double>(k + 1);
    if (sorted[k] - candidate > 0.0) tau = candidate;
  }
  return (u.array() - tau).max(0.0).matrix();
}

struct SectorIndex {
  std::vector<std::vector<Eigen::Index>> members;
  std::vector<double> caps;
};

SectorIndex index_sectors(Eigen::Index n, const std::vector<int>& sector_of, const std::vector<double>& caps) {
  SectorIndex idx;
  if (sector_of.empty()) {
    idx.members.assign(1, {});
    for (Eigen::Index i = 0; i < n; ++i) idx.members[0].push_back(i);
    idx.caps = {1.0};
    return idx;
  }
  if (static_cast<Eigen::Index>(sector_of.size()) != n) throw Error("sector map length does not match asset count");
  idx.members.assign(caps.size(), {});
  idx.caps = caps;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int s = sector_of[static_cast<std::size_t>(i)];
    if (s < 0 || static_cast<std::size_t>(s) >= caps.size()) throw Error("sector index out of range");
    idx.members[static_cast<std::size_t>(s)].push_back(i);
  }
  return idx;
}

double effective_cap_total(const SectorIndex& idx) {
  double total = 0.0;
  for (std::size_t s = 0; s < idx.members.size(); ++s) {
    if (!idx.members[s].empty()) total += std::min(1.0, idx.caps[s]);
  }
  return total;
}

double geo_violation(const Vector& w, const OptConstraints& cons) {
  if (!std::isfinite(cons.gamma_geo)) return 0.0;
  return std::max(0.0, cons.grs_vector.dot(w) - cons.gamma_geo);
}

void check_psd(const Matrix& sigma) {
  if (sigma.rows() != sigma.cols()) throw Error("non-PSD sigma");
  if (!sigma.allFinite()) throw Error("non-PSD sigma");
  const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) throw Error("non-PSD sigma");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-10 * scale) throw Error("non-PSD sigma");
}

}  // namespace

Vector project_capped_simplex(const Vector& v, const std::vector<int>& sector_of, const std::vector<double>& caps) {
  const Eigen::Index n = v.size();
  if (n == 0) throw Error("empty input");
  const SectorIndex idx = index_sectors(n, sector_of, caps);
  const double cap_total = effective_cap_total(idx);
  if (cap_total < 1.0 - 1e-12) throw Error("infeasible");

  auto sector_mass = [&](std::size_t s, double tau) {
    double m = 0.0;
    for (auto i : idx.members[s]) m += std::max(0.0, v[i] - tau);
    return m;
  };
  auto total_mass = [&](double tau) {
    double m = 0.0;
    for (std::size_t s = 0; s < idx.members.size(); ++s) m += std::min(sector_mass(s, tau), idx.caps[s]);
    return m;
  };

  Vector w = Vector::Zero(n);
  if (cap_total <= 1.0 + 1e-14) {
    // Every non-empty sector sits at its cap.
    for (std::size_t s = 0; s < idx.members.size(); ++s) {
      if (idx.members[s].empty()) continue;
      Vector u(static_cast<Eigen::Index>(idx.members[s].size()));
      for (std::size_t k = 0; k < idx.members[s].size(); ++k) u[static_cast<Eigen::Index>(k)] = v[idx.members[s][k]];
      const Vector x = project_scaled_simplex(u, std::min(1.0, idx.caps[s]));
      for (std::size_t k = 0; k < idx.members[s].size(); ++k) w[idx.members[s][k]] = x[static_cast<Eigen::Index>(k)];
    }
    return w / w.sum();
  }

  double lo = v.minCoeff() - 1.0;
  double hi = v.maxCoeff();
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (total_mass(mid) >= 1.0) lo = mid;
    else hi = mid;
  }
  double tau = 0.5 * (lo + hi);

  std::vector<bool> capped(idx.members.size(), false);
  double capped_mass = 0.0;
  for (std::size_t s = 0; s < idx.members.size(); ++s) {
    if (!idx.members[s].empty() && sector_mass(s, tau) > idx.caps[s]) {
      capped[s] = true;
      capped_mass += idx.caps[s];
    }
  }
  // Closed-form threshold on the free support removes bisection residue.
  double support_sum = 0.0;
  int support = 0;
  for (std::size_t s = 0; s < idx.members.size(); ++s) {
    if (capped[s]) continue;
    for (auto i : idx.members[s]) {
      if (v[i] > tau) {
        support_sum += v[i];
        ++support;
      }
    }
  }
  if (support > 0) {
    const double exact = (support_sum - (1.0 - capped_mass)) / support;
    bool consistent = true;
    for (std::size_t s = 0; s < idx.members.size() && consistent; ++s) {
      if (capped[s]) continue;
      for (auto i : idx.members[s]) {
        if ((v[i] > tau) != (v[i] > exact)) consistent = false;
      }
    }
    if (consistent) tau = exact;
  }

  for (std::size_t s = 0; s < idx.members.size(); ++s) {
    if (capped[s]) {
      Vector u(static_cast<Eigen::Index>(idx.members[s].size()));
      for (std::size_t k = 0; k < idx.members[s].size(); ++k) u[static_cast<Eigen::Index>(k)] = v[idx.members[s][k]];
      const Vector x = project_scaled_simplex(u, idx.caps[s]);
      for (std::size_t k = 0; k < idx.members[s].size(); ++k) w[idx.members[s][k]] = x[static_cast<Eigen::Index>(k)];
    } else {
      for (auto i : idx.members[s]) w[i] = std::max(0.0, v[i] - tau);
    }
  }
  return w;
}

std::pair<double, Vector> min_geo_exposure(const OptConstraints& cons, std::size_t n) {
  const auto size = static_cast<Eigen::Index>(n);
  const Vector g = cons.grs_vector.size() == size ? cons.grs_vector : Vector::Zero(size);
  const SectorIndex idx = index_sectors(size, cons.sector_of, cons.sector_caps);
  std::vector<double> room(idx.caps.size());
  for (std::size_t s = 0; s < idx.caps.size(); ++s) room[s] = std::min(1.0, idx.caps[s]);
  std::vector<int> sector_of = cons.sector_of;
  if (sector_of.empty()) sector_of.assign(n, 0);

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return g[a] < g[b]; });
  Vector w = Vector::Zero(size);
  double remaining = 1.0;
  for (auto i : order) {
    if (remaining <= 0.0) break;
    auto& r = room[static_cast<std::size_t>(sector_of[static_cast<std::size_t>(i)])];
    const double take = std::min(remaining, r);
    w[i] = take;
    r -= take;
    remaining -= take;
  }
  if (remaining > 1e-12) throw Error("infeasible");
  return {g.dot(w), w};
}

Vector project_feasible(const Vector& v, const OptConstraints& cons, const OptimizerSettings& settings) {
  auto capped = [&](const Vector& z) { return project_capped_simplex(z, cons.sector_of, cons.sector_caps); };
  Vector y = capped(v);
  if (!std::isfinite(cons.gamma_geo) || geo_violation(y, cons) == 0.0) return y;

  // Projection onto capped simplex and geo half-space is P(v - nu g) at the
  // multiplier nu >= 0 where the geo exposure g.w(nu) meets the budget.
  const Vector& g = cons.grs_vector;
  const double gamma = cons.gamma_geo;
  auto excess = [&](double nu, Vector& w) {
    w = capped(v - nu * g);
    return g.dot(w) - gamma;
  };
  double lo = 0.0, f_lo = g.dot(y) - gamma;
  double hi = 1.0;
  Vector w_hi;
  double f_hi = excess(hi, w_hi);
  for (int it = 0; it < 200 && f_hi > 0.0; ++it) {
    lo = hi;
    f_lo = f_hi;
    hi *= 2.0;
    f_hi = excess(hi, w_hi);
  }
  if (f_hi > 0.0) return min_geo_exposure(cons, static_cast<std::size_t>(v.size())).second;

  // Illinois regula falsi: exact once both ends lie on one linear piece.
  const double tol = std::max(1e-15, 1e-3 * settings.projection_tol) * std::max(1.0, std::abs(gamma));
  Vector w;
  int side = 0;
  double gap = f_hi;
  const int max_iter = std::max(4 * settings.projection_cycles, 64);
  for (int it = 0; it < max_iter && gap < -tol && hi - lo > 1e-15 * hi; ++it) {
    double nu = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
    if (!(nu > lo && nu < hi)) nu = 0.5 * (lo + hi);
    const double f = excess(nu, w);
    if (f > 0.0) {
      lo = nu;
      f_lo = f;
      if (side == -1) f_hi *= 0.5;
      side = -1;
    } else {
      hi = nu;
      f_hi = f;
      gap = f;
      w_hi = w;
      if (side == 1) f_lo *= 0.5;
      side = 1;
    }
  }
  return w_hi;
}

OptimizeResult optimize_traced(const ExpectedReturns& mu, const Matrix& sigma, const OptConstraints& cons,
                               const OptimizerSettings& settings) {
  const Eigen::Index n = mu.mu.size();
  if (n == 0) throw Error("empty input");
  if (sigma.rows() != n || sigma.cols() != n) throw Error("optimize: covariance shape does not match mu");
  if (!mu.mu.allFinite()) throw Error("optimize: non-finite expected returns");
  check_psd(sigma);
  if (!(cons.risk_aversion > 0.0)) throw Error("optimize: risk aversion must be positive");
  if (std::isfinite(cons.gamma_geo) && cons.grs_vector.size() != n) {
    throw Error("optimize: geo sensitivity length does not match mu");
  }
  const SectorIndex idx = index_sectors(n, cons.sector_of, cons.sector_caps);
  if (effective_cap_total(idx) < 1.0 - 1e-12) throw Error("infeasible");
  if (std::isfinite(cons.gamma_geo)) {
    if (min_geo_exposure(cons, static_cast<std::size_t>(n)).first > cons.gamma_geo + 1e-12) throw Error("infeasible");
  }

  OptimizeResult out;
  Vector w = project_feasible(Vector::Constant(n, 1.0 / static_cast<double>(n)), cons, settings);
  out.objective.reserve(static_cast<std::size_t>(settings.iterations) + 1);
  out.objective.push_back(mv_objective(mu.mu, sigma, cons.risk_aversion, w));
  for (int it = 0; it < settings.iterations; ++it) {
    const Vector grad = kAnnualization * (mu.mu - 2.0 * cons.risk_aversion * (sigma * w));
    w = project_feasible(w + settings.step * grad, cons, settings);
    out.objective.push_back(mv_objective(mu.mu, sigma, cons.risk_aversion, w));
  }
  out.weights = Weights(std::move(w));
  return out;
}

Weights optimize(const ExpectedReturns& mu, const Matrix& sigma, const OptConstraints& cons,
                 const OptimizerSettings& settings) {
  return optimize_traced(mu, sigma, cons, settings).weights;
}

OptConstraints make_constraints(const AssetUniverse& universe, const StrategyConfig& cfg, bool with_geo,
                                double mean_geo) {
  OptConstraints c;
  c.risk_aversion = cfg.risk_aversion;
  c.sector_caps.assign(cfg.caps.begin(), cfg.caps.end());
  c.grs_vector.resize(static_cast<Eigen::Index>(universe.size()));
  for (std::size_t i = 0; i < universe.size(); ++i) {
    const auto cls = static_cast<std::size_t>(universe.classes[i]);
    c.sector_of.push_back(static_cast<int>(cls));
    const bool defensive_non_bond = universe.defensive[i] && universe.classes[i] != AssetClass::FixedIncome;
    c.grs_vector[static_cast<Eigen::Index>(i)] = defensive_non_bond ? cfg.geo_sens_defensive : cfg.geo_sens[cls];
  }
  if (with_geo) c.gamma_geo = cfg.gamma0 * (1.0 - cfg.geo_tighten * std::clamp(mean_geo, 0.0, 1.0));
  return c;
}

OptimizerSettings make_settings(const StrategyConfig& cfg) {
  return OptimizerSettings{cfg.opt_step, cfg.opt_iterations, cfg.proj_cycles, cfg.proj_tol};
}

ExpectedReturns estimate_mu(const Matrix& log_returns, int window, double shrink) {
  if (log_returns.rows() == 0) throw Error("insufficient history");
  const Eigen::Index w = std::min<Eigen::Index>(window, log_returns.rows());
  return ExpectedReturns{(1.0 - shrink) * log_returns.bottomRows(w).colwise().mean().transpose()};
}

double select_risk_aversion(const Matrix& log_returns, const std::vector<double>& candidates,
                            const OptConstraints& cons, const RewardParams& p, const StrategyConfig& cfg) {
  if (candidates.empty()) throw Error("select_risk_aversion: empty candidate grid");
  if (log_returns.rows() < 63) throw Error("insufficient history");
  const ExpectedReturns mu = estimate_mu(log_returns, cfg.mu_window, cfg.mu_shrink);
  const Matrix sigma = ewma_covariance(log_returns, cfg.ewma_decay);
  const Matrix simple = (log_returns.array().exp() - 1.0).matrix();
  const OptimizerSettings settings = make_settings(cfg);
  constexpr Eigen::Index kSigmaWindow = 21;

  double best_lambda = candidates.front();
  double best_score = -std::numeric_limits<double>::infinity();
  for (double lambda : candidates) {
    OptConstraints c = cons;
    c.risk_aversion = lambda;
    const Vector w = optimize(mu, sigma, c, settings).values();
    const Vector port = simple * w;
    double equity = 1.0, peak = 1.0, total = 0.0;
    for (Eigen::Index t = 0; t < port.size(); ++t) {
      equity *= 1.0 + port[t];
      peak = std::max(peak, equity);
      const Eigen::Index len = std::min<Eigen::Index>(kSigmaWindow, t + 1);
      const auto seg = port.segment(t - len + 1, len);
      const double sd = len > 1 ? std::sqrt((seg.array() - seg.mean()).square().mean()) : 0.0;
      total += reward(port[t], sd, 1.0 - equity / peak, p);
    }
    const double score = total / static_cast<double>(port.size());
    if (score > best_score || (score == best_score && lambda > best_lambda)) {
      best_score = score;
      best_lambda = lambda;
    }
  }
  return best_lambda;
}

}  // namespace rmats
