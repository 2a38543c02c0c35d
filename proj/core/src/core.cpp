#include "rmats/core.hpp"

#include "rmats/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace rmats {

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::Bull: return "bull";
    case Regime::Bear: return "bear";
    case Regime::Stress: return "stress";
  }
  return "invalid";
}

std::optional<Regime> regime_from_index(int value) {
  if (value < 0 || value > 2) return std::nullopt;
  return static_cast<Regime>(value);
}

int regime_priority(Regime r) {
  switch (r) {
    case Regime::Stress: return 2;
    case Regime::Bear: return 1;
    case Regime::Bull: return 0;
  }
  return -1;
}

Weights::Weights(std::initializer_list<double> values) : values_(static_cast<Eigen::Index>(values.size())) {
  Eigen::Index i = 0;
  for (double v : values) values_[i++] = v;
}

Weights Weights::uniform(std::size_t n) {
  const auto size = static_cast<Eigen::Index>(n);
  return Weights(Vector::Constant(size, n == 0 ? 0.0 : 1.0 / static_cast<double>(n)));
}

bool Weights::on_simplex(double tol) const {
  if (values_.size() == 0) return false;
  if (!values_.allFinite()) return false;
  if ((values_.array() < 0.0).any()) return false;
  return std::abs(values_.sum() - 1.0) <= tol;
}

bool operator==(const Weights& a, const Weights& b) {
  return a.values_.size() == b.values_.size() && (a.values_.array() == b.values_.array()).all();
}

double l2_distance(const Weights& a, const Weights& b) {
  if (a.size() != b.size()) throw Error("l2_distance: length mismatch");
  return (a.values() - b.values()).norm();
}

double l1_distance(const Weights& a, const Weights& b) {
  if (a.size() != b.size()) throw Error("l1_distance: length mismatch");
  return (a.values() - b.values()).lpNorm<1>();
}

std::vector<std::string> validate_message(const AgentMessage& m, std::size_t n) {
  std::vector<std::string> out;
  const Vector& w = m.weights.values();
  if (m.weights.size() != n) {
    out.emplace_back("weights length mismatch");
  }
  if (!w.allFinite()) {
    out.emplace_back("weights not finite");
  } else if (w.size() > 0) {
    if ((w.array() < 0.0).any()) out.emplace_back("negative weight");
    if (std::abs(w.sum() - 1.0) > kSimplexTol) out.emplace_back("weights not normalized");
  }
  if (!(m.confidence >= 0.0 && m.confidence <= 1.0)) out.emplace_back("confidence out of range");
  if (!(m.geo_risk >= 0.0 && m.geo_risk <= 1.0)) out.emplace_back("geo_risk out of range");
  if (!regime_from_index(static_cast<int>(m.regime))) out.emplace_back("regime out of range");
  if (!(m.delta >= 0.0)) out.emplace_back("delta negative");
  return out;
}

Weights project_to_simplex(const Vector& v) {
  if (v.size() == 0) throw Error("empty input");
  if (!v.allFinite()) throw Error("project_to_simplex: non-finite input");
  std::vector<double> sorted(v.data(), v.data() + v.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double tau = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    cumulative += sorted[k];
    const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] - candidate > 0.0) tau = candidate;
  }
  Vector out = (v.array() - tau).max(0.0).matrix();
  // Absorb the last-ulp rounding so the sum is 1 to machine precision.
  const double s = out.sum();
  if (s > 0.0) out /= s;
  return Weights(std::move(out));
}

}  // namespace rmats
