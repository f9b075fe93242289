#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <variant>
#include <vector>

namespace gdl {

/// Moves coordinate i to position image[i].
struct Permutation {
  std::vector<std::size_t> image;
  bool operator==(const Permutation&) const = default;
};

/// Adds multiple * period to every coordinate.
struct Translation {
  std::int64_t multiple = 0;
  double period = 1.0;
  bool operator==(const Translation&) const = default;
};

using GroupElement = std::variant<Permutation, Translation>;

enum class GroupKind { trivial, full_permutation, cyclic_shift, periodic_translation, node_permutation };

/// A finite, enumerable group acting on vectors of a fixed dimension.
///
/// Elements are enumerated once, in a canonical order that starts with the
/// identity for the permutation kinds: permutations lexicographically,
/// shifts by 0..n-1, translations by k = -K..K. The translation group is
/// infinite; it is truncated to the window [-K, K] and closure only holds
/// inside that window.
class GroupAction {
 public:
  static GroupAction trivial(std::size_t dim);
  /// All n! permutations; n <= 8.
  static GroupAction full_permutation(std::size_t n);
  static GroupAction cyclic_shift(std::size_t n);
  static GroupAction periodic_translation(double period, std::int64_t window, std::size_t dim = 1);
  /// S_n acting on a flattened graph (see flatten_graph): node u -> image[u]
  /// moves adjacency entry (u, v) to (image[u], image[v]) and label row u to
  /// row image[u]. n <= 8.
  static GroupAction node_permutation(std::size_t nodes, std::size_t label_dim);

  GroupKind kind() const noexcept { return kind_; }
  std::size_t dimension() const noexcept { return dim_; }
  std::size_t order() const noexcept { return elements_.size(); }
  const std::vector<GroupElement>& elements() const noexcept { return elements_; }

  GroupElement identity() const;
  /// (a * b)(x) = a(b(x)).
  GroupElement compose(const GroupElement& a, const GroupElement& b) const;
  GroupElement inverse(const GroupElement& g) const;

 private:
  GroupAction(GroupKind kind, std::size_t dim, std::vector<GroupElement> elements, double period)
      : kind_(kind), dim_(dim), elements_(std::move(elements)), period_(period) {}

  GroupKind kind_;
  std::size_t dim_;
  std::vector<GroupElement> elements_;
  double period_;
};

inline constexpr std::size_t kMaxEnumeratedPermutation = 8;

std::vector<double> apply(const GroupElement& g, std::span<const double> x);

struct Orbit {
  std::vector<double> representative;
  std::vector<std::vector<double>> members;  // first-seen order, deduplicated within 1e-12

  bool contains(std::span<const double> y, double tol = 1e-12) const;
};

Orbit orbit(std::span<const double> x, const GroupAction& group);

/// Sum of g x over every enumerated element (not over distinct orbit members).
std::vector<double> orbit_sum(std::span<const double> x, const GroupAction& group);

using ScalarFunction = std::function<double(std::span<const double>)>;
using VectorFunction = std::function<std::vector<double>(std::span<const double>)>;

/// f°(x) = mean over g of f(g x).
///
/// The terms are sorted before summation, so for a full group f°(g x) and
/// f°(x) add up the same multiset in the same order and agree bit for bit.
ScalarFunction symmetrize(ScalarFunction f, GroupAction group);

/// min over g of ||y - g x||.
double quotient_distance(std::span<const double> x, std::span<const double> y,
                         const GroupAction& group);

struct DeviationRow {
  std::size_t sample_index;
  std::size_t element_index;
  double deviation;
};

struct SymmetryReport {
  double max_deviation = 0.0;
  std::size_t worst_sample = 0;
  std::size_t worst_element = 0;
  bool passed = true;
  std::vector<DeviationRow> rows;
};

/// max |f(g x) - f(x)| over samples and elements; passes iff <= tol.
SymmetryReport check_invariance(const ScalarFunction& f, const GroupAction& group,
                                std::span<const std::vector<double>> samples, double tol);
/// max ||phi(g x) - g phi(x)|| over samples and elements; passes iff <= tol.
/// Throws std::invalid_argument if phi changes the dimension.
SymmetryReport check_equivariance(const VectorFunction& phi, const GroupAction& group,
                                  std::span<const std::vector<double>> samples, double tol);

/// Writes `sample_index,element_index,deviation` rows.
void write_symmetry_report(std::ostream& os, const SymmetryReport& report);

/// Merges reports computed over disjoint sample partitions; sample indices
/// of `later` are offset by `offset`.
SymmetryReport merge_reports(SymmetryReport first, const SymmetryReport& later, std::size_t offset);

}  // namespace gdl
