#include "gdl/groups.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "gdl/graph.hpp"
#include "gdl/nn.hpp"
#include "gdl/training.hpp"
#include "test_support.hpp"

namespace gdl {
namespace {

using Vec = std::vector<double>;

std::vector<GroupAction> small_groups() {
  std::vector<GroupAction> gs;
  for (std::size_t n = 1; n <= 4; ++n) {
    gs.push_back(GroupAction::trivial(n));
    gs.push_back(GroupAction::full_permutation(n));
    gs.push_back(GroupAction::cyclic_shift(n));
  }
  for (std::int64_t k = 0; k <= 3; ++k) gs.push_back(GroupAction::periodic_translation(3.0, k));
  gs.push_back(GroupAction::periodic_translation(0.5, 2, 3));
  gs.push_back(GroupAction::node_permutation(3, 0));
  gs.push_back(GroupAction::node_permutation(3, 2));
  return gs;
}

bool near(const Vec& a, const Vec& b, double tol) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) > tol) return false;
  }
  return true;
}

TEST(Apply, Examples) {
  const auto s3 = GroupAction::full_permutation(3);
  EXPECT_EQ(gdl::apply(s3.identity(), Vec{1, 2, 3}), (Vec{1, 2, 3}));
  const auto c2 = GroupAction::cyclic_shift(2);
  EXPECT_EQ(gdl::apply(c2.elements()[1], Vec{1, 0}), (Vec{0, 1}));
  EXPECT_EQ(gdl::apply(Translation{1, 3.0}, Vec{1.0}), (Vec{4.0}));
  EXPECT_THROW(gdl::apply(s3.identity(), Vec{1, 2}), std::invalid_argument);
}

TEST(GroupAction, Orders) {
  EXPECT_EQ(GroupAction::full_permutation(4).order(), 24u);
  EXPECT_EQ(GroupAction::full_permutation(8).order(), 40320u);
  EXPECT_EQ(GroupAction::cyclic_shift(5).order(), 5u);
  EXPECT_EQ(GroupAction::periodic_translation(3.0, 2).order(), 5u);
  EXPECT_THROW(GroupAction::full_permutation(9), std::invalid_argument);
  EXPECT_THROW(GroupAction::periodic_translation(-1.0, 2), std::invalid_argument);
}

TEST(GroupAction, Axioms) {
  Rng rng(31);
  for (const auto& group : small_groups()) {
    const auto& el = group.elements();
    const Vec x = testing::random_vector(rng, group.dimension());
    const GroupElement e = group.identity();
    EXPECT_EQ(gdl::apply(e, x), x);
    const bool translation = group.kind() == GroupKind::periodic_translation;
    for (const auto& g : el) {
      EXPECT_EQ(group.compose(g, e), g);
      EXPECT_EQ(group.compose(e, g), g);
      EXPECT_EQ(group.compose(g, group.inverse(g)), e);
      const Vec back = gdl::apply(group.inverse(g), gdl::apply(g, x));
      if (translation) {
        EXPECT_TRUE(near(back, x, 1e-12));
      } else {
        EXPECT_EQ(back, x);
        // Closure for the finite kinds.
        for (const auto& h : el) {
          EXPECT_NE(std::find(el.begin(), el.end(), group.compose(g, h)), el.end());
        }
      }
    }
    for (int t = 0; t < 30; ++t) {
      const auto& a = el[rng.index(el.size())];
      const auto& b = el[rng.index(el.size())];
      const auto& c = el[rng.index(el.size())];
      EXPECT_EQ(group.compose(group.compose(a, b), c), group.compose(a, group.compose(b, c)));
      // compose is the action of applying b, then a.
      EXPECT_TRUE(near(gdl::apply(group.compose(a, b), x), gdl::apply(a, gdl::apply(b, x)), 1e-12));
    }
  }
}

TEST(NodePermutation, MatchesGraphRelabelling) {
  Rng rng(21);
  for (std::size_t n = 1; n <= 5; ++n) {
    const auto group = GroupAction::node_permutation(n, 2);
    EXPECT_EQ(group.dimension(), n * n + 2 * n);
    const LabeledGraph g = testing::with_random_labels(random_graph(n, 0.5, rng.next()), rng, 2);
    const Vec x = flatten_graph(g);
    // Elements follow the lexicographic order of the node images.
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::size_t k = 0;
    do {
      ASSERT_LT(k, group.order());
      EXPECT_EQ(unflatten_graph(gdl::apply(group.elements()[k], x), n, 2), permute_graph(g, perm));
      ++k;
    } while (std::next_permutation(perm.begin(), perm.end()));
    EXPECT_EQ(k, group.order());
  }
  EXPECT_THROW(GroupAction::node_permutation(9, 0), std::invalid_argument);
}

TEST(Orbit, Examples) {
  const auto s2 = GroupAction::full_permutation(2);
  const Orbit o = orbit(Vec{1, 2}, s2);
  EXPECT_EQ(o.members.size(), 2u);
  EXPECT_TRUE(o.contains(Vec{1, 2}));
  EXPECT_TRUE(o.contains(Vec{2, 1}));
  EXPECT_EQ(orbit(Vec{5, 5}, s2).members.size(), 1u);

  const Orbit t = orbit(Vec{1.0}, GroupAction::periodic_translation(3.0, 2));
  ASSERT_EQ(t.members.size(), 5u);
  const double expected[] = {-5, -2, 1, 4, 7};
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(t.members[i][0], expected[i], 1e-12);
}

TEST(Orbit, IsAnEquivalenceClass) {
  Rng rng(2);
  for (std::size_t n = 1; n <= 4; ++n) {
    for (const auto& group : {GroupAction::full_permutation(n), GroupAction::cyclic_shift(n)}) {
      for (int t = 0; t < 20; ++t) {
        const Vec x = testing::random_vector(rng, n);
        const auto& g = group.elements()[rng.index(group.order())];
        const Orbit a = orbit(x, group);
        const Orbit b = orbit(gdl::apply(g, x), group);
        ASSERT_EQ(a.members.size(), b.members.size());
        for (const auto& m : a.members) EXPECT_TRUE(b.contains(m));
      }
    }
  }
}

TEST(OrbitSum, CollapsesOrderedPairs) {
  const auto s2 = GroupAction::full_permutation(2);
  EXPECT_EQ(orbit_sum(Vec{2, 1}, s2), (Vec{3, 3}));
  EXPECT_EQ(orbit_sum(Vec{1, 2}, s2), (Vec{3, 3}));
  EXPECT_EQ(orbit_sum(Vec{4, -1, 2}, GroupAction::trivial(3)), (Vec{4, -1, 2}));
  // Fixed points still count once per group element.
  EXPECT_EQ(orbit_sum(Vec{5, 5}, s2), (Vec{10, 10}));
}

TEST(Symmetrize, Examples) {
  const auto s2 = GroupAction::full_permutation(2);
  const ScalarFunction constant = [](std::span<const double>) { return 2.75; };
  EXPECT_EQ(symmetrize(constant, s2)(Vec{1, 9}), 2.75);
  const ScalarFunction first = [](std::span<const double> x) { return x[0]; };
  EXPECT_EQ(symmetrize(first, s2)(Vec{1, 4}), 2.5);
}

TEST(Symmetrize, TrainedMlpIsBitStableOnOrbit) {
  const std::size_t dims[] = {3, 6, 1};
  Dataset<Vec> data;
  Rng rng(10);
  for (int i = 0; i < 12; ++i) {
    const Vec x = testing::random_vector(rng, 3);
    data.push_back({x, Vec{x[0] - 2 * x[1] + x[2] * x[2]}});
  }
  TrainConfig cfg;
  cfg.learning_rate = 0.05;
  cfg.epochs = 200;
  const MLP net = train(mlp_init(dims, Activation::tanh, 1), data, cfg).model;
  const ScalarFunction f = [net](std::span<const double> x) { return mlp_eval(net, x)[0]; };
  const auto sym = symmetrize(f, GroupAction::full_permutation(3));
  EXPECT_EQ(sym(Vec{1, 2, 3}), sym(Vec{3, 1, 2}));
  EXPECT_NE(f(Vec{1, 2, 3}), f(Vec{3, 1, 2}));
}

TEST(Symmetrize, InvariantAndIdempotent) {
  Rng rng(41);
  for (std::size_t n = 2; n <= 4; ++n) {
    for (const auto& group : {GroupAction::full_permutation(n), GroupAction::cyclic_shift(n)}) {
      const MLP net = testing::random_mlp(rng, 3, 5, n, 1);
      const ScalarFunction f = [net](std::span<const double> x) { return mlp_eval(net, x)[0]; };
      const auto once = symmetrize(f, group);
      const auto twice = symmetrize(once, group);
      std::vector<Vec> samples;
      for (int i = 0; i < 20; ++i) samples.push_back(testing::random_vector(rng, n));
      const auto report = check_invariance(once, group, samples, 1e-9);
      EXPECT_TRUE(report.passed) << report.max_deviation;
      for (const auto& x : samples) EXPECT_NEAR(twice(x), once(x), 1e-12);
    }
  }
}

TEST(QuotientDistance, Examples) {
  const auto t3 = GroupAction::periodic_translation(3.0, 3);
  EXPECT_EQ(quotient_distance(Vec{1.0}, Vec{1.0}, t3), 0.0);
  EXPECT_NEAR(quotient_distance(Vec{1.0}, Vec{7.0}, t3), 0.0, 1e-12);
  EXPECT_NEAR(quotient_distance(Vec{1.0}, Vec{2.2}, t3), 1.2, 1e-12);
}

TEST(QuotientDistance, NeverExceedsEuclidean) {
  Rng rng(9);
  for (const auto& group : small_groups()) {
    for (int i = 0; i < 30; ++i) {
      const Vec x = testing::random_vector(rng, group.dimension(), -10, 10);
      const Vec y = testing::random_vector(rng, group.dimension(), -10, 10);
      double d = 0.0;
      for (std::size_t k = 0; k < x.size(); ++k) d += (x[k] - y[k]) * (x[k] - y[k]);
      EXPECT_LE(quotient_distance(x, y, group), std::sqrt(d));
    }
  }
}

TEST(CheckInvariance, ReportsDeviation) {
  const ScalarFunction first = [](std::span<const double> x) { return x[0]; };
  const std::vector<Vec> samples{{1, 2}};
  const auto report = check_invariance(first, GroupAction::full_permutation(2), samples, 1e-9);
  EXPECT_FALSE(report.passed);
  EXPECT_EQ(report.max_deviation, 1.0);
  EXPECT_EQ(report.worst_sample, 0u);
  EXPECT_EQ(report.worst_element, 1u);
}

TEST(CheckEquivariance, Examples) {
  const auto s2 = GroupAction::full_permutation(2);
  const std::vector<Vec> samples{{2, 1}};
  const VectorFunction squared_first = [](std::span<const double> x) {
    return Vec{x[0] * x[0], x[1]};
  };
  const auto bad = check_equivariance(squared_first, s2, samples, 1e-9);
  EXPECT_FALSE(bad.passed);
  EXPECT_EQ(bad.max_deviation, 2.0);

  const VectorFunction pointwise = [](std::span<const double> x) {
    Vec y(x.begin(), x.end());
    for (double& v : y) v = std::tanh(v) + v * v;
    return y;
  };
  const VectorFunction identity = [](std::span<const double> x) { return Vec(x.begin(), x.end()); };
  Rng rng(4);
  std::vector<Vec> xs;
  for (int i = 0; i < 10; ++i) xs.push_back(testing::random_vector(rng, 3));
  EXPECT_TRUE(check_equivariance(pointwise, GroupAction::full_permutation(3), xs, 1e-12).passed);
  EXPECT_TRUE(check_equivariance(identity, GroupAction::cyclic_shift(3), xs, 0.0).passed);

  const VectorFunction shrink = [](std::span<const double> x) { return Vec{x[0]}; };
  EXPECT_THROW(check_equivariance(shrink, s2, samples, 1e-9), std::invalid_argument);
}

TEST(SymmetryReport, CsvAndMerge) {
  const ScalarFunction first = [](std::span<const double> x) { return x[0]; };
  const auto s2 = GroupAction::full_permutation(2);
  const std::vector<Vec> a{{1, 1}};
  const std::vector<Vec> b{{1, 3}};
  const auto merged =
      merge_reports(check_invariance(first, s2, a, 0.5), check_invariance(first, s2, b, 0.5), 1);
  EXPECT_EQ(merged.max_deviation, 2.0);
  EXPECT_EQ(merged.worst_sample, 1u);
  EXPECT_FALSE(merged.passed);
  std::ostringstream os;
  write_symmetry_report(os, merged);
  EXPECT_EQ(os.str(), "sample_index,element_index,deviation\n0,0,0\n0,1,0\n1,0,0\n1,1,2\n");
}

}  // namespace
}  // namespace gdl
