#include "gdl/graph.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "gdl/random.hpp"
#include "gdl/training.hpp"

namespace gdl {

LabeledGraph::LabeledGraph(std::size_t n)
    : n_(n), adjacency_(n * n, 0), neighbors_(n) {}

void LabeledGraph::add_edge(std::size_t u, std::size_t v) {
  if (u >= n_ || v >= n_) {
    throw std::invalid_argument("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                                ") references a missing node");
  }
  if (u == v) throw std::invalid_argument("self-loop at node " + std::to_string(u));
  if (adjacent(u, v)) {
    throw std::invalid_argument("duplicate edge (" + std::to_string(u) + ", " +
                                std::to_string(v) + ")");
  }
  adjacency_[u * n_ + v] = 1;
  adjacency_[v * n_ + u] = 1;
  auto insert_sorted = [](std::vector<std::size_t>& list, std::size_t x) {
    list.insert(std::upper_bound(list.begin(), list.end(), x), x);
  };
  insert_sorted(neighbors_[u], v);
  insert_sorted(neighbors_[v], u);
  ++edge_count_;
}

std::vector<std::pair<std::size_t, std::size_t>> LabeledGraph::edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(edge_count_);
  for (std::size_t u = 0; u < n_; ++u) {
    for (std::size_t v : neighbors_[u]) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;
}

void LabeledGraph::set_labels(std::vector<std::vector<double>> rows) {
  if (rows.empty()) {
    labels_.clear();
    return;
  }
  if (rows.size() != n_) {
    throw std::invalid_argument("label matrix has " + std::to_string(rows.size()) +
                                " rows for " + std::to_string(n_) + " nodes");
  }
  const std::size_t d = rows.front().size();
  if (d == 0) throw std::invalid_argument("label rows must be non-empty");
  for (const auto& r : rows) {
    if (r.size() != d) throw std::invalid_argument("label rows have differing widths");
  }
  labels_ = std::move(rows);
}

bool LabeledGraph::operator==(const LabeledGraph& other) const {
  return n_ == other.n_ && adjacency_ == other.adjacency_ && labels_ == other.labels_;
}

LabeledGraph cycle_graph(std::size_t n) {
  if (n < 3) throw std::invalid_argument("a simple cycle needs at least 3 nodes");
  LabeledGraph g(n);
  for (std::size_t i = 0; i < n; ++i) g.add_edge(i, (i + 1) % n);
  return g;
}

LabeledGraph path_graph(std::size_t n) {
  if (n == 0) throw std::invalid_argument("a path needs at least one node");
  LabeledGraph g(n);
  for (std::size_t i = 0; i + 1 < n; ++i) g.add_edge(i, i + 1);
  return g;
}

LabeledGraph star_graph(std::size_t leaves) {
  LabeledGraph g(leaves + 1);
  for (std::size_t i = 1; i <= leaves; ++i) g.add_edge(0, i);
  return g;
}

LabeledGraph disjoint_union(const LabeledGraph& a, const LabeledGraph& b) {
  if (a.has_labels() != b.has_labels()) {
    throw std::invalid_argument("cannot join a labeled graph with an unlabeled one");
  }
  const std::size_t offset = a.node_count();
  LabeledGraph g(offset + b.node_count());
  for (auto [u, v] : a.edges()) g.add_edge(u, v);
  for (auto [u, v] : b.edges()) g.add_edge(u + offset, v + offset);
  if (a.has_labels()) {
    auto rows = a.labels();
    rows.insert(rows.end(), b.labels().begin(), b.labels().end());
    g.set_labels(std::move(rows));
  }
  return g;
}

LabeledGraph random_graph(std::size_t n, double edge_prob, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("a graph needs at least one node");
  Rng rng(seed);
  LabeledGraph g(n);
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      if (rng.bernoulli(edge_prob)) g.add_edge(u, v);
    }
  }
  return g;
}

LabeledGraph permute_graph(const LabeledGraph& g, std::span<const std::size_t> perm) {
  const std::size_t n = g.node_count();
  if (perm.size() != n) throw std::invalid_argument("permutation size does not match the graph");
  std::vector<bool> seen(n, false);
  for (std::size_t p : perm) {
    if (p >= n || seen[p]) throw std::invalid_argument("not a permutation");
    seen[p] = true;
  }
  LabeledGraph out(n);
  for (auto [u, v] : g.edges()) out.add_edge(perm[u], perm[v]);
  if (g.has_labels()) {
    std::vector<std::vector<double>> rows(n);
    for (std::size_t i = 0; i < n; ++i) rows[perm[i]] = g.labels()[i];
    out.set_labels(std::move(rows));
  }
  return out;
}

std::vector<double> flatten_graph(const LabeledGraph& g) {
  const std::size_t n = g.node_count();
  const std::size_t d = g.label_dim();
  std::vector<double> out(n * n + n * d, 0.0);
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) out[u * n + v] = g.adjacent(u, v) ? 1.0 : 0.0;
    for (std::size_t k = 0; k < d; ++k) out[n * n + u * d + k] = g.labels()[u][k];
  }
  return out;
}

LabeledGraph unflatten_graph(std::span<const double> values, std::size_t n, std::size_t d) {
  if (values.size() != n * n + n * d) {
    throw std::invalid_argument("flattened graph has " + std::to_string(values.size()) +
                                " entries, expected " + std::to_string(n * n + n * d));
  }
  LabeledGraph g(n);
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      const double a = values[u * n + v];
      if (a != 0.0 && a != 1.0) throw std::invalid_argument("adjacency entries must be 0 or 1");
      if (a != values[v * n + u]) throw std::invalid_argument("adjacency is not symmetric");
      if (u == v && a != 0.0) throw std::invalid_argument("adjacency has a self-loop");
      if (u < v && a == 1.0) g.add_edge(u, v);
    }
  }
  if (d > 0) {
    std::vector<std::vector<double>> rows(n, std::vector<double>(d));
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t k = 0; k < d; ++k) rows[u][k] = values[n * n + u * d + k];
    }
    g.set_labels(std::move(rows));
  }
  return g;
}

LabeledGraph parse_graph(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::size_t n = 0;
  std::size_t m = 0;
  if (!(in >> n >> m)) throw std::invalid_argument("graph file must start with 'n m'");
  LabeledGraph g(n);
  for (std::size_t e = 0; e < m; ++e) {
    long long u = -1;
    long long v = -1;
    if (!(in >> u >> v)) {
      throw std::invalid_argument("graph file ends before edge " + std::to_string(e));
    }
    if (u < 0 || v < 0) throw std::invalid_argument("negative node id in edge list");
    g.add_edge(static_cast<std::size_t>(u), static_cast<std::size_t>(v));
  }
  std::string word;
  if (in >> word) {
    if (word != "labels") throw std::invalid_argument("unexpected token '" + word + "'");
    std::string line;
    std::getline(in, line);
    std::vector<std::vector<double>> rows;
    while (rows.size() < n && std::getline(in, line)) {
      std::istringstream row_in(line);
      std::vector<double> row;
      double x;
      while (row_in >> x) row.push_back(x);
      if (!row_in.eof()) throw std::invalid_argument("non-numeric label entry");
      if (!row.empty()) rows.push_back(std::move(row));
    }
    if (rows.size() != n) throw std::invalid_argument("labels section needs one row per node");
    g.set_labels(std::move(rows));
    if (in >> word) throw std::invalid_argument("trailing content after labels");
  }
  return g;
}

std::string format_graph(const LabeledGraph& g) {
  std::ostringstream out;
  out << g.node_count() << ' ' << g.edge_count() << '\n';
  for (auto [u, v] : g.edges()) out << u << ' ' << v << '\n';
  if (g.has_labels()) {
    out << "labels\n";
    for (const auto& row : g.labels()) {
      for (std::size_t j = 0; j < row.size(); ++j) out << (j ? " " : "") << format_double(row[j]);
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace gdl
