#include "gdl/graph.hpp"
#include "gdl/wl.hpp"

#include <gtest/gtest.h>

#include "gdl/random.hpp"

namespace gdl {
namespace {

using Sizes = std::vector<std::size_t>;

TEST(Graph, Generators) {
  EXPECT_EQ(cycle_graph(3).edge_count(), 3u);
  EXPECT_EQ(disjoint_union(cycle_graph(3), cycle_graph(3)).node_count(), 6u);
  EXPECT_EQ(path_graph(4).edge_count(), 3u);
  const LabeledGraph s = star_graph(3);
  EXPECT_EQ(s.node_count(), 4u);
  EXPECT_EQ(s.degree(0), 3u);
  EXPECT_EQ(random_graph(6, 1.0, 1).edge_count(), 15u);
  EXPECT_EQ(random_graph(6, 0.0, 1).edge_count(), 0u);
  EXPECT_EQ(random_graph(7, 0.4, 3), random_graph(7, 0.4, 3));
  EXPECT_THROW(cycle_graph(2), std::invalid_argument);
}

TEST(Graph, RejectsBadEdges) {
  LabeledGraph g(3);
  g.add_edge(0, 1);
  EXPECT_THROW(g.add_edge(1, 0), std::invalid_argument);
  EXPECT_THROW(g.add_edge(2, 2), std::invalid_argument);
  EXPECT_THROW(g.add_edge(0, 3), std::invalid_argument);
  EXPECT_TRUE(g.adjacent(1, 0));
}

TEST(Graph, Permute) {
  const LabeledGraph p = path_graph(4);
  const std::size_t id[] = {0, 1, 2, 3};
  EXPECT_EQ(permute_graph(p, id), p);
  const std::size_t perm[] = {2, 0, 3, 1};
  const LabeledGraph q = permute_graph(p, perm);
  for (auto [u, v] : p.edges()) EXPECT_TRUE(q.adjacent(perm[u], perm[v]));
  EXPECT_EQ(q.edge_count(), p.edge_count());
  const std::size_t bad[] = {0, 0, 1, 2};
  EXPECT_THROW(permute_graph(p, bad), std::invalid_argument);
}

TEST(Graph, FlattenRoundTrip) {
  LabeledGraph g = path_graph(3);
  EXPECT_EQ(flatten_graph(g), (std::vector<double>{0, 1, 0, 1, 0, 1, 0, 1, 0}));
  EXPECT_EQ(unflatten_graph(flatten_graph(g), 3, 0), g);
  g.set_labels({{1, 2}, {3, 4}, {5, 6}});
  const auto flat = flatten_graph(g);
  ASSERT_EQ(flat.size(), 15u);
  EXPECT_EQ(flat[9], 1.0);
  EXPECT_EQ(flat[14], 6.0);
  EXPECT_EQ(unflatten_graph(flat, 3, 2), g);
  EXPECT_THROW(unflatten_graph(std::vector<double>{0, 1, 0, 0}, 2, 0), std::invalid_argument);
  EXPECT_THROW(unflatten_graph(std::vector<double>{1, 0, 0, 0}, 2, 0), std::invalid_argument);
  EXPECT_THROW(unflatten_graph(std::vector<double>{0, 0.5, 0.5, 0}, 2, 0), std::invalid_argument);
  EXPECT_THROW(unflatten_graph(std::vector<double>{0, 1, 1}, 2, 0), std::invalid_argument);
}

TEST(Graph, TextRoundTrip) {
  LabeledGraph g = cycle_graph(4);
  g.set_labels({{0.5, 1}, {-2, 0}, {1e-3, 7}, {3, 3}});
  const LabeledGraph back = parse_graph(format_graph(g));
  EXPECT_EQ(back, g);
  EXPECT_EQ(parse_graph("3 2\n0 1\n1 2\n"), path_graph(3));
  EXPECT_THROW(parse_graph("2 1\n0 0\n"), std::invalid_argument);
  EXPECT_THROW(parse_graph("3 2\n0 1\n1 0\n"), std::invalid_argument);
  EXPECT_THROW(parse_graph("3 2\n0 1\n"), std::invalid_argument);
  EXPECT_THROW(parse_graph("2 0\nlabels\n1\n"), std::invalid_argument);
}

TEST(WL, PathSplitsEndsFromMiddle) {
  const LabeledGraph p = path_graph(3);
  const WLColoring c = wl_refine_step(p, wl_initial_coloring(p));
  EXPECT_EQ(c.partition_sizes(), (Sizes{1, 2}));
  EXPECT_EQ(c.colors[0], c.colors[2]);
  EXPECT_NE(c.colors[0], c.colors[1]);
}

TEST(WL, RegularGraphStaysUniform) {
  const LabeledGraph g = cycle_graph(7);
  WLColoring c = wl_initial_coloring(g);
  for (int r = 0; r < 5; ++r) {
    c = wl_refine_step(g, c);
    EXPECT_EQ(c.class_count(), 1u);
  }
}

TEST(WL, StableColoringIsFixedPoint) {
  const LabeledGraph g = path_graph(5);
  WLColoring c = wl_initial_coloring(g);
  for (int r = 0; r < 5; ++r) c = wl_refine_step(g, c);
  const WLColoring again = wl_refine_step(g, c);
  EXPECT_EQ(again.colors, c.colors);
}

TEST(WL, FigurePairIsAFalsePositive) {
  const LabeledGraph c6 = cycle_graph(6);
  const LabeledGraph c33 = disjoint_union(cycle_graph(3), cycle_graph(3));
  EXPECT_EQ(wl_signature(c6), wl_signature(c33));
  EXPECT_TRUE(wl_equivalent(c6, c33));
  EXPECT_FALSE(brute_force_isomorphic(c6, c33));
}

TEST(WL, PathVersusStar) {
  const LabeledGraph p4 = path_graph(4);
  const LabeledGraph s3 = star_graph(3);
  EXPECT_NE(wl_signature(p4), wl_signature(s3));
  EXPECT_FALSE(wl_equivalent(p4, s3));
  EXPECT_FALSE(brute_force_isomorphic(p4, s3));
  const auto a = wl_signature(p4).partition_sizes;
  EXPECT_EQ(a.back(), (Sizes{2, 2}));
}

TEST(WL, LabelsSeparateOtherwiseEqualGraphs) {
  LabeledGraph a = path_graph(3);
  LabeledGraph b = path_graph(3);
  a.set_labels({{1}, {0}, {0}});
  b.set_labels({{0}, {1}, {0}});
  EXPECT_FALSE(wl_equivalent(a, b));
  EXPECT_FALSE(brute_force_isomorphic(a, b));
  LabeledGraph c = path_graph(3);
  c.set_labels({{0}, {0}, {1}});
  EXPECT_TRUE(wl_equivalent(a, c));
  EXPECT_TRUE(brute_force_isomorphic(a, c));
}

TEST(WL, SignatureIgnoresNodeOrder) {
  Rng rng(12);
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 1 + rng.index(8);
    const LabeledGraph g = random_graph(n, rng.uniform(), rng.next());
    const auto perm = rng.permutation(n);
    const LabeledGraph h = permute_graph(g, perm);
    EXPECT_EQ(wl_signature(g), wl_signature(h));
    EXPECT_EQ(wl_signature(g), wl_signature(g));
    EXPECT_TRUE(brute_force_isomorphic(g, h));
  }
}

TEST(WL, PartitionRefinesMonotonically) {
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 1 + rng.index(9);
    const LabeledGraph g = random_graph(n, rng.uniform(), rng.next());
    WLColoring c = wl_initial_coloring(g);
    std::size_t count = c.class_count();
    for (std::size_t r = 0; r < n; ++r) {
      const WLColoring next = wl_refine_step(g, c);
      EXPECT_GE(next.class_count(), count);
      // Never merges: nodes split apart stay apart.
      for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = 0; v < n; ++v) {
          if (c.colors[u] != c.colors[v]) {
            EXPECT_NE(next.colors[u], next.colors[v]);
          }
        }
      }
      count = next.class_count();
      c = next;
    }
    EXPECT_EQ(wl_refine_step(g, c).class_count(), count);
    EXPECT_LE(wl_signature(g).partition_sizes.size(), n + 1);
  }
}

// 500 pairs with n <= 7: half are relabelled copies, half independent draws
// with matching node and edge counts whenever the sampler finds one.
TEST(WL, SoundAgainstBruteForce) {
  Rng rng(2718);
  int iso = 0;
  int separated = 0;
  for (int i = 0; i < 500; ++i) {
    const std::size_t n = 1 + rng.index(7);
    const double p = rng.uniform();
    const LabeledGraph a = random_graph(n, p, rng.next());
    LabeledGraph b;
    if (i % 2 == 0) {
      b = permute_graph(a, rng.permutation(n));
    } else {
      b = random_graph(n, p, rng.next());
      for (int tries = 0; tries < 50 && b.edge_count() != a.edge_count(); ++tries) {
        b = random_graph(n, p, rng.next());
      }
    }
    const bool wl = wl_equivalent(a, b);
    const bool oracle = brute_force_isomorphic(a, b);
    if (oracle) {
      EXPECT_TRUE(wl) << format_graph(a) << "--\n" << format_graph(b);
      ++iso;
    }
    if (!wl) {
      EXPECT_FALSE(oracle);
      ++separated;
    }
  }
  EXPECT_GT(iso, 250);
  EXPECT_GT(separated, 50);
}

TEST(BruteForce, Limits) {
  EXPECT_FALSE(brute_force_isomorphic(path_graph(4), cycle_graph(4)));
  EXPECT_FALSE(brute_force_isomorphic(path_graph(4), path_graph(5)));
  EXPECT_THROW(brute_force_isomorphic(cycle_graph(10), cycle_graph(10)), std::invalid_argument);
}

}  // namespace
}  // namespace gdl
