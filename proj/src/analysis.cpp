#include "gdl/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace gdl {

DiscreteDistribution::DiscreteDistribution(std::vector<double> weights)
    : weights_(std::move(weights)) {
  if (weights_.empty()) throw std::invalid_argument("distribution needs at least one weight");
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("distribution weights must be finite and non-negative");
    }
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("distribution weights sum to " + std::to_string(total));
  }
}

DiscreteDistribution DiscreteDistribution::from_unnormalized(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("weights must be non-negative");
    total += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("weights must have positive total");
  std::vector<double> out(weights.begin(), weights.end());
  for (double& w : out) w /= total;
  return DiscreteDistribution(std::move(out));
}

SymmetrizationMap::SymmetrizationMap(std::vector<std::size_t> class_of)
    : class_of_(std::move(class_of)) {
  for (std::size_t i = 0; i < class_of_.size(); ++i) {
    const std::size_t c = class_of_[i];
    if (c >= class_of_.size()) {
      throw std::invalid_argument("class label " + std::to_string(c) + " is not an estimator index");
    }
    if (class_of_[c] != c) {
      throw std::invalid_argument("class map is not idempotent at index " + std::to_string(i));
    }
  }
  classes_ = class_of_;
  std::sort(classes_.begin(), classes_.end());
  classes_.erase(std::unique(classes_.begin(), classes_.end()), classes_.end());
}

SymmetrizationMap SymmetrizationMap::identity(std::size_t n) {
  std::vector<std::size_t> c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = i;
  return SymmetrizationMap(std::move(c));
}

double kl_divergence(const DiscreteDistribution& q, const DiscreteDistribution& p) {
  if (q.size() != p.size()) throw std::invalid_argument("distributions differ in support size");
  double total = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] == 0.0) continue;
    if (p[i] == 0.0) return std::numeric_limits<double>::infinity();
    total += q[i] * std::log(q[i] / p[i]);
  }
  return total;
}

double catoni_bound(double empirical_risk, double kl, std::size_t n, double beta, double delta) {
  if (!(empirical_risk >= 0.0 && empirical_risk <= 1.0)) {
    throw std::invalid_argument("empirical risk must lie in [0, 1]");
  }
  if (!(kl >= 0.0) || !std::isfinite(kl)) throw std::invalid_argument("KL must be finite and >= 0");
  if (n == 0) throw std::invalid_argument("sample count must be at least 1");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be positive");
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("delta must lie in (0, 1]");
  const double exponent =
      -beta * empirical_risk - (kl + std::log(1.0 / delta)) / static_cast<double>(n);
  return -std::expm1(exponent) / -std::expm1(-beta);
}

DiscreteDistribution symmetrize_distribution(const DiscreteDistribution& q,
                                             const SymmetrizationMap& map) {
  if (map.size() != q.size()) {
    throw std::invalid_argument("class map covers " + std::to_string(map.size()) +
                                " estimators, distribution has " + std::to_string(q.size()));
  }
  const auto& classes = map.classes();
  std::vector<double> mass(classes.size(), 0.0);
  for (std::size_t i = 0; i < q.size(); ++i) {
    const auto it = std::lower_bound(classes.begin(), classes.end(), map.class_of(i));
    mass[static_cast<std::size_t>(it - classes.begin())] += q[i];
  }
  return DiscreteDistribution::from_unnormalized(mass);
}

double symmetrization_gap(const DiscreteDistribution& q, const DiscreteDistribution& p,
                          const SymmetrizationMap& map) {
  const double full = kl_divergence(q, p);
  const double reduced = kl_divergence(symmetrize_distribution(q, map), symmetrize_distribution(p, map));
  if (std::isinf(full) || std::isinf(reduced)) {
    throw std::domain_error("symmetrization gap is undefined: a KL term is infinite");
  }
  return full - reduced;
}

}  // namespace gdl
