#pragma once

#include <cstddef>
#include <compare>
#include <utility>
#include <vector>

#include "gdl/graph.hpp"

namespace gdl {

/// Canonical node coloring: colors are 0..k-1, numbered by the sorted order
/// of the keys that produced them.
struct WLColoring {
  std::vector<std::size_t> colors;
  std::size_t round = 0;

  std::size_t class_count() const;
  /// Class sizes sorted ascending.
  std::vector<std::size_t> partition_sizes() const;
};

/// A node's refinement key: its own color and its neighbors' colors, sorted.
struct RefinementKey {
  std::size_t own;
  std::vector<std::size_t> neighbors;
  auto operator<=>(const RefinementKey&) const = default;
};

/// Everything needed to compare two graphs' refinements across processes.
///
/// Colors are only ranks inside one graph, so the signature also records
/// each round's distinct keys with their multiplicities (and the distinct
/// initial labels). Two graphs share a signature iff a refinement with a
/// shared injective hash could not tell them apart.
struct WLSignature {
  std::vector<std::size_t> colors;                       // sorted final colors
  std::vector<std::vector<std::size_t>> partition_sizes;  // per round, sorted
  std::vector<std::pair<std::vector<double>, std::size_t>> initial_classes;
  std::vector<std::vector<std::pair<RefinementKey, std::size_t>>> rounds;

  bool operator==(const WLSignature&) const = default;
};

/// Uniform color 0 for unlabeled graphs; otherwise labels rounded to 12
/// decimals and ranked lexicographically.
WLColoring wl_initial_coloring(const LabeledGraph& g);
/// One refinement round. Never merges distinct old colors.
WLColoring wl_refine_step(const LabeledGraph& g, const WLColoring& coloring);
/// Refines until the partition stops changing or n rounds have run.
WLSignature wl_signature(const LabeledGraph& g);
bool wl_equivalent(const LabeledGraph& a, const LabeledGraph& b);

inline constexpr std::size_t kMaxBruteForceNodes = 9;

/// Exhaustive search for an adjacency- and label-preserving bijection.
/// Throws std::invalid_argument above kMaxBruteForceNodes nodes.
bool brute_force_isomorphic(const LabeledGraph& a, const LabeledGraph& b);

}  // namespace gdl
