#include "gdl/wl.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace gdl {
namespace {

std::vector<double> bucket_label(const std::vector<double>& row) {
  std::vector<double> key(row.size());
  for (std::size_t i = 0; i < row.size(); ++i) {
    const double r = std::round(row[i] * 1e12) / 1e12;
    key[i] = r == 0.0 ? 0.0 : r;  // fold -0 into +0
  }
  return key;
}

/// Assigns ranks of sorted distinct keys; returns (colors, key table).
template <class Key>
std::pair<std::vector<std::size_t>, std::vector<std::pair<Key, std::size_t>>> rank_keys(
    const std::vector<Key>& keys) {
  std::map<Key, std::size_t> counts;
  for (const auto& k : keys) ++counts[k];
  std::map<Key, std::size_t> rank;
  std::vector<std::pair<Key, std::size_t>> table;
  for (const auto& [k, c] : counts) {
    rank.emplace(k, table.size());
    table.emplace_back(k, c);
  }
  std::vector<std::size_t> colors(keys.size());
  for (std::size_t v = 0; v < keys.size(); ++v) colors[v] = rank.at(keys[v]);
  return {std::move(colors), std::move(table)};
}

std::vector<RefinementKey> refinement_keys(const LabeledGraph& g, const WLColoring& coloring) {
  if (coloring.colors.size() != g.node_count()) {
    throw std::invalid_argument("coloring does not match the graph");
  }
  std::vector<RefinementKey> keys(g.node_count());
  for (std::size_t v = 0; v < g.node_count(); ++v) {
    keys[v].own = coloring.colors[v];
    for (std::size_t u : g.neighbors(v)) keys[v].neighbors.push_back(coloring.colors[u]);
    std::sort(keys[v].neighbors.begin(), keys[v].neighbors.end());
  }
  return keys;
}

}  // namespace

std::size_t WLColoring::class_count() const {
  std::vector<std::size_t> c = colors;
  std::sort(c.begin(), c.end());
  return static_cast<std::size_t>(std::unique(c.begin(), c.end()) - c.begin());
}

std::vector<std::size_t> WLColoring::partition_sizes() const {
  std::map<std::size_t, std::size_t> counts;
  for (std::size_t c : colors) ++counts[c];
  std::vector<std::size_t> sizes;
  for (const auto& [c, n] : counts) sizes.push_back(n);
  std::sort(sizes.begin(), sizes.end());
  return sizes;
}

WLColoring wl_initial_coloring(const LabeledGraph& g) {
  WLColoring out;
  if (!g.has_labels()) {
    out.colors.assign(g.node_count(), 0);
    return out;
  }
  std::vector<std::vector<double>> keys;
  keys.reserve(g.node_count());
  for (const auto& row : g.labels()) keys.push_back(bucket_label(row));
  out.colors = rank_keys(keys).first;
  return out;
}

WLColoring wl_refine_step(const LabeledGraph& g, const WLColoring& coloring) {
  WLColoring out;
  out.colors = rank_keys(refinement_keys(g, coloring)).first;
  out.round = coloring.round + 1;
  return out;
}

WLSignature wl_signature(const LabeledGraph& g) {
  WLSignature sig;
  WLColoring coloring;
  if (g.has_labels()) {
    std::vector<std::vector<double>> keys;
    for (const auto& row : g.labels()) keys.push_back(bucket_label(row));
    auto [colors, table] = rank_keys(keys);
    coloring.colors = std::move(colors);
    sig.initial_classes = std::move(table);
  } else {
    coloring.colors.assign(g.node_count(), 0);
    if (g.node_count() > 0) sig.initial_classes.emplace_back(std::vector<double>{}, g.node_count());
  }
  sig.partition_sizes.push_back(coloring.partition_sizes());
  std::size_t classes = coloring.class_count();
  for (std::size_t r = 0; r < g.node_count(); ++r) {
    auto [colors, table] = rank_keys(refinement_keys(g, coloring));
    coloring.colors = std::move(colors);
    coloring.round = r + 1;
    sig.rounds.push_back(std::move(table));
    sig.partition_sizes.push_back(coloring.partition_sizes());
    const std::size_t next = coloring.class_count();
    if (next == classes) break;
    classes = next;
  }
  sig.colors = coloring.colors;
  std::sort(sig.colors.begin(), sig.colors.end());
  return sig;
}

bool wl_equivalent(const LabeledGraph& a, const LabeledGraph& b) {
  if (a.node_count() != b.node_count()) return false;
  return wl_signature(a) == wl_signature(b);
}

namespace {

struct IsoSearch {
  const LabeledGraph& a;
  const LabeledGraph& b;
  std::vector<std::size_t> map;  // node of a -> node of b
  std::vector<bool> used;

  bool extend(std::size_t i) {
    const std::size_t n = a.node_count();
    if (i == n) return true;
    for (std::size_t j = 0; j < n; ++j) {
      if (used[j] || a.degree(i) != b.degree(j)) continue;
      if (a.has_labels() && a.labels()[i] != b.labels()[j]) continue;
      bool ok = true;
      for (std::size_t k = 0; k < i && ok; ++k) ok = a.adjacent(i, k) == b.adjacent(j, map[k]);
      if (!ok) continue;
      map[i] = j;
      used[j] = true;
      if (extend(i + 1)) return true;
      used[j] = false;
    }
    return false;
  }
};

}  // namespace

bool brute_force_isomorphic(const LabeledGraph& a, const LabeledGraph& b) {
  if (a.node_count() > kMaxBruteForceNodes || b.node_count() > kMaxBruteForceNodes) {
    throw std::invalid_argument("brute-force isomorphism is limited to " +
                                std::to_string(kMaxBruteForceNodes) + " nodes");
  }
  if (a.node_count() != b.node_count() || a.edge_count() != b.edge_count()) return false;
  if (a.has_labels() != b.has_labels() || a.label_dim() != b.label_dim()) return false;
  IsoSearch search{a, b, std::vector<std::size_t>(a.node_count()),
                   std::vector<bool>(a.node_count(), false)};
  return search.extend(0);
}

}  // namespace gdl
