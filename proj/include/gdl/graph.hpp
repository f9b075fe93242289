#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gdl {

/// Undirected simple graph with optional real node labels (n rows of d reals).
class LabeledGraph {
 public:
  LabeledGraph() = default;
  explicit LabeledGraph(std::size_t n);

  std::size_t node_count() const noexcept { return n_; }
  std::size_t edge_count() const noexcept { return edge_count_; }

  /// Throws std::invalid_argument on self-loops, duplicates or bad ids.
  void add_edge(std::size_t u, std::size_t v);
  bool adjacent(std::size_t u, std::size_t v) const { return adjacency_[u * n_ + v] != 0; }
  /// Neighbors in ascending order.
  const std::vector<std::size_t>& neighbors(std::size_t v) const { return neighbors_[v]; }
  std::size_t degree(std::size_t v) const { return neighbors_[v].size(); }
  /// Edges (u, v) with u < v, sorted.
  std::vector<std::pair<std::size_t, std::size_t>> edges() const;

  bool has_labels() const noexcept { return !labels_.empty(); }
  std::size_t label_dim() const noexcept { return labels_.empty() ? 0 : labels_.front().size(); }
  const std::vector<std::vector<double>>& labels() const noexcept { return labels_; }
  /// Exactly n rows of one common width (n = 0 clears the labels).
  void set_labels(std::vector<std::vector<double>> rows);

  bool operator==(const LabeledGraph& other) const;

 private:
  std::size_t n_ = 0;
  std::size_t edge_count_ = 0;
  std::vector<std::uint8_t> adjacency_;
  std::vector<std::vector<std::size_t>> neighbors_;
  std::vector<std::vector<double>> labels_;
};

/// Cycle on n >= 3 nodes.
LabeledGraph cycle_graph(std::size_t n);
/// Path on n >= 1 nodes.
LabeledGraph path_graph(std::size_t n);
/// Star with one center (node 0) and `leaves` leaves.
LabeledGraph star_graph(std::size_t leaves);
/// Nodes of `b` follow those of `a`; both or neither must carry labels.
LabeledGraph disjoint_union(const LabeledGraph& a, const LabeledGraph& b);
/// Erdos-Renyi G(n, p).
LabeledGraph random_graph(std::size_t n, double edge_prob, std::uint64_t seed);
/// Node i becomes node perm[i]; adjacency is conjugated and label rows move along.
LabeledGraph permute_graph(const LabeledGraph& g, std::span<const std::size_t> perm);

/// Row-major n x n adjacency (0/1) followed by the n x d label matrix.
std::vector<double> flatten_graph(const LabeledGraph& g);
/// Inverse of flatten_graph; d = 0 means unlabeled. Throws on entries other
/// than 0/1, asymmetric adjacency or a non-zero diagonal.
LabeledGraph unflatten_graph(std::span<const double> values, std::size_t n, std::size_t d);

/// Text format: `n m`, then m lines `u v` (0-based), then optionally a line
/// `labels` followed by n rows of d reals.
LabeledGraph parse_graph(std::string_view text);
std::string format_graph(const LabeledGraph& g);

}  // namespace gdl
