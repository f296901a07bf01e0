#pragma once

#include "gne/game_model.hpp"

#include <vector>

namespace gne {

/// Oriented edge; orientation is bookkeeping only. Incidence row has +1 at
/// the head and -1 at the tail. Node indices are 0-based.
struct Edge {
  int head = 0;
  int tail = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Undirected, connected communication graph with a fixed edge orientation.
class CommGraph {
 public:
  /// Throws GraphError on self-loops, duplicate edges, out-of-range nodes or
  /// a disconnected graph.
  static CommGraph build(int num_nodes, std::vector<Edge> edges);

  [[nodiscard]] int num_nodes() const { return num_nodes_; }
  [[nodiscard]] int num_edges() const { return static_cast<int>(edges_.size()); }
  [[nodiscard]] const std::vector<Edge>& edges() const { return edges_; }
  [[nodiscard]] const std::vector<int>& neighbors(int i) const { return neighbors_[i]; }
  [[nodiscard]] const std::vector<int>& out_edges(int i) const { return out_edges_[i]; }
  [[nodiscard]] const std::vector<int>& in_edges(int i) const { return in_edges_[i]; }
  [[nodiscard]] int degree(int i) const { return static_cast<int>(neighbors_[i].size()); }

  [[nodiscard]] Mat incidence() const;
  [[nodiscard]] Mat laplacian() const;

  // Blockwise Kronecker products; v stacks one m-vector per node (or edge).
  [[nodiscard]] Vec apply_laplacian(const Vec& node_stacked, int m) const;
  [[nodiscard]] Vec apply_incidence(const Vec& node_stacked, int m) const;
  [[nodiscard]] Vec apply_incidence_transpose(const Vec& edge_stacked, int m) const;

 private:
  CommGraph() = default;

  int num_nodes_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> neighbors_;
  std::vector<std::vector<int>> out_edges_;
  std::vector<std::vector<int>> in_edges_;
};

/// Number of connected components of an undirected edge list.
[[nodiscard]] int count_components(int num_nodes, const std::vector<Edge>& edges);

}  // namespace gne
