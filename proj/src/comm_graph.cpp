#include "gne/comm_graph.hpp"

#include "gne/errors.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <string>
#include <utility>

namespace gne {

namespace {

std::string edge_label(const Edge& e) {
  return "(" + std::to_string(e.head + 1) + ", " + std::to_string(e.tail + 1) + ")";
}

int find_root(std::vector<int>& parent, int v) {
  while (parent[v] != v) {
    parent[v] = parent[parent[v]];
    v = parent[v];
  }
  return v;
}

}  // namespace

int count_components(int num_nodes, const std::vector<Edge>& edges) {
  std::vector<int> parent(num_nodes);
  std::iota(parent.begin(), parent.end(), 0);
  int components = num_nodes;
  for (const auto& e : edges) {
    const int a = find_root(parent, e.head);
    const int b = find_root(parent, e.tail);
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components;
}

CommGraph CommGraph::build(int num_nodes, std::vector<Edge> edges) {
  if (num_nodes < 1) throw GraphError("graph needs at least one node");
  std::set<std::pair<int, int>> seen;
  for (const auto& e : edges) {
    if (e.head < 0 || e.head >= num_nodes || e.tail < 0 || e.tail >= num_nodes)
      throw GraphError("edge " + edge_label(e) + " references a node outside 1.." + std::to_string(num_nodes));
    if (e.head == e.tail) throw GraphError("self-loop at node " + std::to_string(e.head + 1));
    const auto key = std::minmax(e.head, e.tail);
    if (!seen.insert(key).second) throw GraphError("duplicate edge " + edge_label(e));
  }
  if (count_components(num_nodes, edges) != 1) throw GraphError("graph is disconnected");

  CommGraph g;
  g.num_nodes_ = num_nodes;
  g.edges_ = std::move(edges);
  g.neighbors_.resize(num_nodes);
  g.out_edges_.resize(num_nodes);
  g.in_edges_.resize(num_nodes);
  for (int l = 0; l < g.num_edges(); ++l) {
    const auto& e = g.edges_[l];
    g.out_edges_[e.head].push_back(l);
    g.in_edges_[e.tail].push_back(l);
    g.neighbors_[e.head].push_back(e.tail);
    g.neighbors_[e.tail].push_back(e.head);
  }
  for (auto& nb : g.neighbors_) std::sort(nb.begin(), nb.end());
  return g;
}

Mat CommGraph::incidence() const {
  Mat E = Mat::Zero(num_edges(), num_nodes_);
  for (int l = 0; l < num_edges(); ++l) {
    E(l, edges_[l].head) = 1.0;
    E(l, edges_[l].tail) = -1.0;
  }
  return E;
}

Mat CommGraph::laplacian() const {
  Mat L = Mat::Zero(num_nodes_, num_nodes_);
  for (const auto& e : edges_) {
    L(e.head, e.head) += 1.0;
    L(e.tail, e.tail) += 1.0;
    L(e.head, e.tail) -= 1.0;
    L(e.tail, e.head) -= 1.0;
  }
  return L;
}

Vec CommGraph::apply_laplacian(const Vec& node_stacked, int m) const {
  return apply_incidence_transpose(apply_incidence(node_stacked, m), m);
}

Vec CommGraph::apply_incidence(const Vec& node_stacked, int m) const {
  if (node_stacked.size() != static_cast<Eigen::Index>(num_nodes_) * m)
    throw DimensionError("node-stacked vector has wrong length");
  Vec out(static_cast<Eigen::Index>(num_edges()) * m);
  for (int l = 0; l < num_edges(); ++l)
    out.segment(l * m, m) =
        node_stacked.segment(edges_[l].head * m, m) - node_stacked.segment(edges_[l].tail * m, m);
  return out;
}

Vec CommGraph::apply_incidence_transpose(const Vec& edge_stacked, int m) const {
  if (edge_stacked.size() != static_cast<Eigen::Index>(num_edges()) * m)
    throw DimensionError("edge-stacked vector has wrong length");
  Vec out = Vec::Zero(static_cast<Eigen::Index>(num_nodes_) * m);
  for (int l = 0; l < num_edges(); ++l) {
    out.segment(edges_[l].head * m, m) += edge_stacked.segment(l * m, m);
    out.segment(edges_[l].tail * m, m) -= edge_stacked.segment(l * m, m);
  }
  return out;
}

}  // namespace gne
