#include "gdl/groups.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

#include "gdl/training.hpp"

namespace gdl {
namespace {

Permutation identity_permutation(std::size_t n) {
  Permutation p;
  p.image.resize(n);
  std::iota(p.image.begin(), p.image.end(), std::size_t{0});
  return p;
}

double euclidean(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

bool near(std::span<const double> a, std::span<const double> b, double tol) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) > tol) return false;
  }
  return true;
}

void check_dim(const GroupAction& group, std::span<const double> x) {
  if (x.size() != group.dimension()) {
    throw std::invalid_argument("vector of dimension " + std::to_string(x.size()) +
                                " does not match the group action dimension " +
                                std::to_string(group.dimension()));
  }
}

}  // namespace

GroupAction GroupAction::trivial(std::size_t dim) {
  return GroupAction(GroupKind::trivial, dim, {identity_permutation(dim)}, 0.0);
}

GroupAction GroupAction::full_permutation(std::size_t n) {
  if (n == 0) throw std::invalid_argument("permutation group needs n >= 1");
  if (n > kMaxEnumeratedPermutation) {
    throw std::invalid_argument("full_permutation(" + std::to_string(n) +
                                ") is too large to enumerate; use a structurally invariant model");
  }
  std::vector<GroupElement> elements;
  Permutation p = identity_permutation(n);
  do {
    elements.emplace_back(p);
  } while (std::next_permutation(p.image.begin(), p.image.end()));
  return GroupAction(GroupKind::full_permutation, n, std::move(elements), 0.0);
}

GroupAction GroupAction::cyclic_shift(std::size_t n) {
  if (n == 0) throw std::invalid_argument("cyclic group needs n >= 1");
  std::vector<GroupElement> elements;
  for (std::size_t s = 0; s < n; ++s) {
    Permutation p;
    p.image.resize(n);
    for (std::size_t i = 0; i < n; ++i) p.image[i] = (i + s) % n;
    elements.emplace_back(std::move(p));
  }
  return GroupAction(GroupKind::cyclic_shift, n, std::move(elements), 0.0);
}

GroupAction GroupAction::periodic_translation(double period, std::int64_t window, std::size_t dim) {
  if (!(period > 0.0) || !std::isfinite(period)) {
    throw std::invalid_argument("translation period must be positive");
  }
  if (window < 0) throw std::invalid_argument("translation window must be non-negative");
  if (dim == 0) throw std::invalid_argument("translation dimension must be positive");
  std::vector<GroupElement> elements;
  for (std::int64_t k = -window; k <= window; ++k) elements.emplace_back(Translation{k, period});
  return GroupAction(GroupKind::periodic_translation, dim, std::move(elements), period);
}

GroupAction GroupAction::node_permutation(std::size_t nodes, std::size_t label_dim) {
  if (nodes == 0) throw std::invalid_argument("node permutation group needs n >= 1");
  if (nodes > kMaxEnumeratedPermutation) {
    throw std::invalid_argument("node_permutation(" + std::to_string(nodes) +
                                ") is too large to enumerate");
  }
  const std::size_t n = nodes;
  const std::size_t dim = n * n + n * label_dim;
  std::vector<GroupElement> elements;
  Permutation nodes_perm = identity_permutation(n);
  do {
    const auto& pi = nodes_perm.image;
    Permutation p;
    p.image.resize(dim);
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t v = 0; v < n; ++v) p.image[u * n + v] = pi[u] * n + pi[v];
      for (std::size_t k = 0; k < label_dim; ++k) {
        p.image[n * n + u * label_dim + k] = n * n + pi[u] * label_dim + k;
      }
    }
    elements.emplace_back(std::move(p));
  } while (std::next_permutation(nodes_perm.image.begin(), nodes_perm.image.end()));
  return GroupAction(GroupKind::node_permutation, dim, std::move(elements), 0.0);
}

GroupElement GroupAction::identity() const {
  if (kind_ == GroupKind::periodic_translation) return Translation{0, period_};
  return identity_permutation(dim_);
}

GroupElement GroupAction::compose(const GroupElement& a, const GroupElement& b) const {
  if (const auto* pa = std::get_if<Permutation>(&a)) {
    const auto& pb = std::get<Permutation>(b);
    Permutation c;
    c.image.resize(pb.image.size());
    for (std::size_t i = 0; i < pb.image.size(); ++i) c.image[i] = pa->image[pb.image[i]];
    return c;
  }
  const auto& ta = std::get<Translation>(a);
  const auto& tb = std::get<Translation>(b);
  return Translation{ta.multiple + tb.multiple, ta.period};
}

GroupElement GroupAction::inverse(const GroupElement& g) const {
  if (const auto* p = std::get_if<Permutation>(&g)) {
    Permutation inv;
    inv.image.resize(p->image.size());
    for (std::size_t i = 0; i < p->image.size(); ++i) inv.image[p->image[i]] = i;
    return inv;
  }
  const auto& t = std::get<Translation>(g);
  return Translation{-t.multiple, t.period};
}

std::vector<double> apply(const GroupElement& g, std::span<const double> x) {
  if (const auto* p = std::get_if<Permutation>(&g)) {
    if (p->image.size() != x.size()) {
      throw std::invalid_argument("permutation of size " + std::to_string(p->image.size()) +
                                  " applied to a vector of dimension " + std::to_string(x.size()));
    }
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[p->image[i]] = x[i];
    return y;
  }
  const auto& t = std::get<Translation>(g);
  const double shift = static_cast<double>(t.multiple) * t.period;
  std::vector<double> y(x.begin(), x.end());
  for (double& v : y) v += shift;
  return y;
}

bool Orbit::contains(std::span<const double> y, double tol) const {
  return std::any_of(members.begin(), members.end(),
                     [&](const std::vector<double>& m) { return near(m, y, tol); });
}

Orbit orbit(std::span<const double> x, const GroupAction& group) {
  check_dim(group, x);
  Orbit o;
  o.representative.assign(x.begin(), x.end());
  for (const auto& g : group.elements()) {
    std::vector<double> gx = gdl::apply(g, x);
    if (!o.contains(gx)) o.members.push_back(std::move(gx));
  }
  return o;
}

std::vector<double> orbit_sum(std::span<const double> x, const GroupAction& group) {
  check_dim(group, x);
  std::vector<double> total(x.size(), 0.0);
  for (const auto& g : group.elements()) {
    const std::vector<double> gx = gdl::apply(g, x);
    for (std::size_t i = 0; i < gx.size(); ++i) total[i] += gx[i];
  }
  return total;
}

ScalarFunction symmetrize(ScalarFunction f, GroupAction group) {
  return [f = std::move(f), group = std::move(group)](std::span<const double> x) {
    check_dim(group, x);
    std::vector<double> terms;
    terms.reserve(group.order());
    for (const auto& g : group.elements()) terms.push_back(f(gdl::apply(g, x)));
    std::sort(terms.begin(), terms.end());
    double total = 0.0;
    for (double t : terms) total += t;
    return total / static_cast<double>(terms.size());
  };
}

double quotient_distance(std::span<const double> x, std::span<const double> y,
                         const GroupAction& group) {
  check_dim(group, x);
  check_dim(group, y);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& g : group.elements()) best = std::min(best, euclidean(y, gdl::apply(g, x)));
  return best;
}

namespace {

void note(SymmetryReport& report, std::size_t s, std::size_t e, double deviation) {
  report.rows.push_back({s, e, deviation});
  if (deviation > report.max_deviation || std::isnan(deviation)) {
    report.max_deviation = deviation;
    report.worst_sample = s;
    report.worst_element = e;
  }
}

}  // namespace

SymmetryReport check_invariance(const ScalarFunction& f, const GroupAction& group,
                                std::span<const std::vector<double>> samples, double tol) {
  SymmetryReport report;
  const auto& elements = group.elements();
  for (std::size_t s = 0; s < samples.size(); ++s) {
    check_dim(group, samples[s]);
    const double base = f(samples[s]);
    for (std::size_t e = 0; e < elements.size(); ++e) {
      note(report, s, e, std::abs(f(gdl::apply(elements[e], samples[s])) - base));
    }
  }
  report.passed = report.max_deviation <= tol;
  return report;
}

SymmetryReport check_equivariance(const VectorFunction& phi, const GroupAction& group,
                                  std::span<const std::vector<double>> samples, double tol) {
  SymmetryReport report;
  const auto& elements = group.elements();
  for (std::size_t s = 0; s < samples.size(); ++s) {
    check_dim(group, samples[s]);
    const std::vector<double> base = phi(samples[s]);
    if (base.size() != samples[s].size()) {
      throw std::invalid_argument("equivariance check needs a dimension-preserving map");
    }
    for (std::size_t e = 0; e < elements.size(); ++e) {
      const std::vector<double> lhs = phi(gdl::apply(elements[e], samples[s]));
      if (lhs.size() != base.size()) {
        throw std::invalid_argument("equivariance check needs a dimension-preserving map");
      }
      note(report, s, e, euclidean(lhs, gdl::apply(elements[e], base)));
    }
  }
  report.passed = report.max_deviation <= tol;
  return report;
}

void write_symmetry_report(std::ostream& os, const SymmetryReport& report) {
  os << "sample_index,element_index,deviation\n";
  for (const auto& row : report.rows) {
    os << row.sample_index << ',' << row.element_index << ',' << format_double(row.deviation)
       << '\n';
  }
}

SymmetryReport merge_reports(SymmetryReport first, const SymmetryReport& later,
                             std::size_t offset) {
  for (const auto& row : later.rows) {
    first.rows.push_back({row.sample_index + offset, row.element_index, row.deviation});
  }
  if (later.max_deviation > first.max_deviation) {
    first.max_deviation = later.max_deviation;
    first.worst_sample = later.worst_sample + offset;
    first.worst_element = later.worst_element;
  }
  first.passed = first.passed && later.passed;
  return first;
}

}  // namespace gdl
