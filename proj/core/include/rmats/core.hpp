#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rmats {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kSimplexTol = 1e-9;

enum class Regime : std::uint8_t { Bull = 0, Bear = 1, Stress = 2 };

std::string_view to_string(Regime r);
std::optional<Regime> regime_from_index(int value);

// Tie-break order used by every vote over regimes: Stress > Bear > Bull.
int regime_priority(Regime r);

// Per-asset portfolio fractions indexed by asset ordinal. Construction does
// not enforce the simplex so that malformed proposals can be represented and
// reported by validate_message; use on_simplex() or project_to_simplex().
class Weights {
 public:
  Weights() = default;
  explicit Weights(Vector values) : values_(std::move(values)) {}
  Weights(std::initializer_list<double> values);

  static Weights uniform(std::size_t n);

  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
  double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }
  const Vector& values() const { return values_; }

  bool on_simplex(double tol = kSimplexTol) const;

  friend bool operator==(const Weights& a, const Weights& b);

 private:
  Vector values_;
};

double l2_distance(const Weights& a, const Weights& b);
double l1_distance(const Weights& a, const Weights& b);

// One agent's proposal for one coordination round.
struct AgentMessage {
  Weights weights;
  double confidence = 0.0;
  double geo_risk = 0.0;
  Regime regime = Regime::Bull;
  long timestamp = 0;  // trading-day index into the price calendar
  double delta = 0.0;  // L2 distance to this agent's previous-round proposal
  bool circuit_breaker = false;  // risk override; honored by the manager
};

// Manager's consensus state sent to every agent after a round.
struct BroadcastMessage {
  Weights agg_weights;
  double mean_geo = 0.0;
  Regime consensus_regime = Regime::Bull;
  std::vector<double> health;
  bool circuit_breaker = false;
  int round = 0;
};

std::vector<std::string> validate_message(const AgentMessage& m, std::size_t n);

// Euclidean projection onto the probability simplex (sort-and-threshold).
// Throws Error("empty input") on an empty vector.
Weights project_to_simplex(const Vector& v);

}  // namespace rmats
