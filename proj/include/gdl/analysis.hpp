#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gdl {

/// Probability weights over a finite, indexed family of estimators.
class DiscreteDistribution {
 public:
  /// Weights must be non-negative and sum to 1 within 1e-12.
  explicit DiscreteDistribution(std::vector<double> weights);
  /// Normalizes non-negative weights with a positive total.
  static DiscreteDistribution from_unnormalized(std::span<const double> weights);

  std::size_t size() const noexcept { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }
  std::span<const double> weights() const noexcept { return weights_; }

 private:
  std::vector<double> weights_;
};

/// Sends each estimator index to the index of its symmetrized class. Class
/// labels are member indices, and the map is idempotent: class_of(class_of(i))
/// == class_of(i).
class SymmetrizationMap {
 public:
  explicit SymmetrizationMap(std::vector<std::size_t> class_of);
  static SymmetrizationMap identity(std::size_t n);

  std::size_t size() const noexcept { return class_of_.size(); }
  std::size_t class_of(std::size_t i) const { return class_of_.at(i); }
  /// Distinct class labels, ascending; the order of symmetrized weights.
  const std::vector<std::size_t>& classes() const noexcept { return classes_; }

 private:
  std::vector<std::size_t> class_of_;
  std::vector<std::size_t> classes_;
};

/// KL(Q || P) in nats with 0 log 0 = 0. Returns +infinity when Q puts mass
/// where P has none.
double kl_divergence(const DiscreteDistribution& q, const DiscreteDistribution& p);

/// (1 - exp(-beta R - (KL + log(1/delta)) / n)) / (1 - exp(-beta)).
/// delta = 1 is accepted as the boundary case log(1/delta) = 0.
double catoni_bound(double empirical_risk, double kl, std::size_t n, double beta, double delta);

/// Class weight = total weight of the class members.
DiscreteDistribution symmetrize_distribution(const DiscreteDistribution& q,
                                             const SymmetrizationMap& map);

/// KL(Q || P) - KL(Q° || P°). Throws std::domain_error when either KL is
/// infinite.
double symmetrization_gap(const DiscreteDistribution& q, const DiscreteDistribution& p,
                          const SymmetrizationMap& map);

}  // namespace gdl
