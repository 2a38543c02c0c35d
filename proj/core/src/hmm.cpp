#include "rmats/hmm.hpp"

#include "rmats/error.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <numeric>
#include <random>

namespace rmats {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

void check_obs(const HmmModel& model, const Matrix& obs) {
  if (obs.cols() != model.dim) throw Error("regime_posterior: observation dimension does not match model");
  if (!obs.allFinite()) throw Error("regime_posterior: non-finite observations");
}

// Emission likelihoods rescaled per row; returns per-row log offsets.
Matrix scaled_emissions(const HmmModel& model, const Matrix& obs, Vector& log_offset) {
  const Eigen::Index T = obs.rows();
  const Eigen::Index K = model.states;
  Matrix b(T, K);
  log_offset.resize(T);
  for (Eigen::Index t = 0; t < T; ++t) {
    Vector lb = model.log_emission(obs.row(t));
    const double m = lb.maxCoeff();
    log_offset[t] = m;
    b.row(t) = (lb.array() - m).exp().matrix().transpose();
  }
  return b;
}

struct ForwardPass {
  Matrix alpha;  // normalized
  Vector scale;  // per-step normalizers
  double log_likelihood = 0.0;
};

ForwardPass forward(const HmmModel& model, const Matrix& b, const Vector& log_offset) {
  const Eigen::Index T = b.rows();
  const Eigen::Index K = model.states;
  ForwardPass f;
  f.alpha.resize(T, K);
  f.scale.resize(T);
  Eigen::RowVectorXd a = model.initial.transpose().cwiseProduct(b.row(0));
  for (Eigen::Index t = 0; t < T; ++t) {
    if (t > 0) a = (f.alpha.row(t - 1) * model.transition).cwiseProduct(b.row(t));
    double c = a.sum();
    if (!(c > 0.0) || !std::isfinite(c)) {
      // Every state assigns zero likelihood; fall back to the predicted prior.
      a = t > 0 ? Eigen::RowVectorXd(f.alpha.row(t - 1) * model.transition) : Eigen::RowVectorXd(model.initial.transpose());
      c = a.sum();
      f.log_likelihood += -std::numeric_limits<double>::infinity();
    }
    f.scale[t] = c;
    f.alpha.row(t) = a / c;
    f.log_likelihood += std::log(c) + log_offset[t];
  }
  return f;
}

double diag_gauss_log(const Eigen::Ref<const Eigen::RowVectorXd>& x, const Eigen::Ref<const Eigen::RowVectorXd>& mean,
                      const Eigen::Ref<const Eigen::RowVectorXd>& var) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double d = x[j] - mean[j];
    s += -0.5 * (kLog2Pi + std::log(var[j]) + d * d / var[j]);
  }
  return s;
}

HmmModel initial_model(const Matrix& obs, int K, std::uint64_t seed) {
  const Eigen::Index T = obs.rows();
  const Eigen::Index d = obs.cols();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(T));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return obs(a, 0) < obs(b, 0); });

  HmmModel m;
  m.states = K;
  m.dim = static_cast<int>(d);
  m.initial = Vector::Constant(K, 1.0 / K);
  m.means.resize(K, d);
  m.variances.resize(K, d);
  for (int k = 0; k < K; ++k) {
    const auto begin = static_cast<std::size_t>(T * k / K);
    const auto end = static_cast<std::size_t>(T * (k + 1) / K);
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(d);
    for (std::size_t i = begin; i < end; ++i) mean += obs.row(order[i]);
    mean /= static_cast<double>(end - begin);
    Eigen::RowVectorXd var = Eigen::RowVectorXd::Zero(d);
    for (std::size_t i = begin; i < end; ++i) var += (obs.row(order[i]) - mean).array().square().matrix();
    var /= static_cast<double>(end - begin);
    m.means.row(k) = mean;
    m.variances.row(k) = var.cwiseMax(kHmmVarianceFloor);
  }
  m.transition.resize(K, K);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(0.0, 0.01);
  for (int i = 0; i < K; ++i) {
    for (int j = 0; j < K; ++j) {
      const double base = K == 1 ? 1.0 : (i == j ? 0.9 : 0.1 / (K - 1));
      m.transition(i, j) = base + (K == 1 ? 0.0 : jitter(rng));
    }
    m.transition.row(i) /= m.transition.row(i).sum();
  }
  return m;
}

}  // namespace

Vector HmmModel::log_emission(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  Vector out(states);
  for (int k = 0; k < states; ++k) out[k] = diag_gauss_log(x, means.row(k), variances.row(k));
  return out;
}

HmmFit hmm_fit(const Matrix& obs, int states, std::uint64_t seed, int max_iter, double tol) {
  if (states < 1) throw Error("hmm_fit: need at least one state");
  if (obs.rows() < 50) throw Error("insufficient observations");
  if (obs.cols() < 1) throw Error("hmm_fit: observations have no columns");
  if (!obs.allFinite()) throw Error("hmm_fit: non-finite observations");
  bool identical = true;
  for (Eigen::Index t = 1; t < obs.rows() && identical; ++t) identical = (obs.row(t).array() == obs.row(0).array()).all();
  if (identical) throw Error("degenerate input");

  const Eigen::Index T = obs.rows();
  const Eigen::Index K = states;
  const Eigen::Index d = obs.cols();
  HmmFit fit;
  HmmModel model = initial_model(obs, states, seed);

  for (int iter = 0; iter <= max_iter; ++iter) {
    Vector log_offset;
    const Matrix b = scaled_emissions(model, obs, log_offset);
    const ForwardPass f = forward(model, b, log_offset);
    const double ll = f.log_likelihood;
    if (!fit.log_likelihood.empty() && ll - fit.log_likelihood.back() < tol) {
      fit.log_likelihood.push_back(ll);
      fit.converged = true;
      break;
    }
    fit.log_likelihood.push_back(ll);
    if (iter == max_iter) break;

    // Backward pass with the forward scaling factors.
    Matrix beta(T, K);
    beta.row(T - 1).setOnes();
    for (Eigen::Index t = T - 2; t >= 0; --t) {
      const Eigen::RowVectorXd next = beta.row(t + 1).cwiseProduct(b.row(t + 1));
      beta.row(t) = (model.transition * next.transpose()).transpose() / f.scale[t + 1];
    }
    Matrix gamma = f.alpha.cwiseProduct(beta);
    for (Eigen::Index t = 0; t < T; ++t) {
      const double s = gamma.row(t).sum();
      if (s > 0.0) gamma.row(t) /= s;
    }
    Matrix xi_sum = Matrix::Zero(K, K);
    for (Eigen::Index t = 0; t + 1 < T; ++t) {
      const Eigen::RowVectorXd next = beta.row(t + 1).cwiseProduct(b.row(t + 1));
      Matrix xi = (f.alpha.row(t).transpose() * next).cwiseProduct(model.transition) / f.scale[t + 1];
      const double s = xi.sum();
      if (s > 0.0) xi_sum += xi / s;
    }

    HmmModel next = model;
    next.initial = gamma.row(0).transpose();
    for (Eigen::Index i = 0; i < K; ++i) {
      const double row = xi_sum.row(i).sum();
      if (row > 0.0) next.transition.row(i) = xi_sum.row(i) / row;
    }
    for (Eigen::Index k = 0; k < K; ++k) {
      const double occupancy = gamma.col(k).sum();
      if (!(occupancy > 1e-12)) continue;  // keep the previous emission for an unused state
      const Eigen::RowVectorXd mean = (gamma.col(k).transpose() * obs) / occupancy;
      Eigen::RowVectorXd var = Eigen::RowVectorXd::Zero(d);
      for (Eigen::Index t = 0; t < T; ++t) var += gamma(t, k) * (obs.row(t) - mean).array().square().matrix();
      var /= occupancy;
      next.means.row(k) = mean;
      next.variances.row(k) = var.cwiseMax(kHmmVarianceFloor);
    }
    model = std::move(next);
    fit.iterations = iter + 1;
  }
  fit.model = std::move(model);
  return fit;
}

Matrix regime_posterior(const HmmModel& model, const Matrix& obs) {
  check_obs(model, obs);
  if (obs.rows() == 0) return Matrix(0, model.states);
  Vector log_offset;
  const Matrix b = scaled_emissions(model, obs, log_offset);
  return forward(model, b, log_offset).alpha;
}

double hmm_log_likelihood(const HmmModel& model, const Matrix& obs) {
  check_obs(model, obs);
  Vector log_offset;
  const Matrix b = scaled_emissions(model, obs, log_offset);
  return forward(model, b, log_offset).log_likelihood;
}

std::vector<Regime> regime_label(const HmmModel& model) {
  if (model.states != 3) throw Error("regime_label: requires a 3-state model");
  std::array<int, 3> idx{0, 1, 2};
  int stress = 0;
  for (int k = 1; k < 3; ++k) {
    const double vk = model.variances(k, 0);
    const double vs = model.variances(stress, 0);
    if (vk > vs || (vk == vs && model.means(k, 0) < model.means(stress, 0))) stress = k;
  }
  std::vector<int> rest;
  for (int k : idx) {
    if (k != stress) rest.push_back(k);
  }
  // Equal means: the lower index is Bull.
  const bool first_is_bull = model.means(rest[0], 0) >= model.means(rest[1], 0);
  std::vector<Regime> labels(3);
  labels[static_cast<std::size_t>(stress)] = Regime::Stress;
  labels[static_cast<std::size_t>(rest[0])] = first_is_bull ? Regime::Bull : Regime::Bear;
  labels[static_cast<std::size_t>(rest[1])] = first_is_bull ? Regime::Bear : Regime::Bull;
  return labels;
}

}  // namespace rmats
