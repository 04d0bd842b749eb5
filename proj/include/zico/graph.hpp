#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "zico/matrix.hpp"

namespace zico {

struct Edge {
  std::size_t parent;
  std::size_t child;
  auto operator<=>(const Edge&) const = default;
};

// General directed graph over d nodes, stored as a dense 0/1 adjacency.
// Used for thresholded estimates, which need not be acyclic.
class Digraph {
 public:
  Digraph() = default;
  explicit Digraph(std::size_t d) : d_(d), adj_(d * d, 0) {}

  std::size_t node_count() const { return d_; }
  bool has_edge(std::size_t k, std::size_t j) const { return adj_[k * d_ + j] != 0; }
  void set_edge(std::size_t k, std::size_t j, bool present = true);
  std::size_t edge_count() const;
  std::vector<Edge> edges() const;

  bool operator==(const Digraph&) const = default;

 private:
  std::size_t d_ = 0;
  std::vector<std::uint8_t> adj_;
};

// Acyclic graph with a witnessing topological order.
class DagGraph {
 public:
  DagGraph() = default;
  // Throws ParameterError on self-loops, duplicates, out-of-range nodes, or
  // when an edge contradicts topo_order.
  DagGraph(std::size_t d, std::vector<Edge> edges, std::vector<std::size_t> topo_order);
  // Builds the topological order itself; throws ParameterError on a cycle.
  static DagGraph from_edges(std::size_t d, std::vector<Edge> edges);

  std::size_t node_count() const { return d_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<std::size_t>& topo_order() const { return topo_order_; }
  std::vector<std::size_t> parents(std::size_t j) const;
  Digraph digraph() const;

  bool operator==(const DagGraph&) const = default;

 private:
  std::size_t d_ = 0;
  std::vector<Edge> edges_;  // sorted (parent, child)
  std::vector<std::size_t> topo_order_;
};

struct SupportMasks {
  Digraph m0;  // zero-inflation component
  Digraph m1;  // count component
  double rho = 1.0;
};

DagGraph generate_er(std::size_t d, double p, std::uint64_t seed);
DagGraph generate_ba(std::size_t d, std::size_t m, std::uint64_t seed);

// True iff {(k, j) : |adj(k, j)| > tol} admits a topological order.
bool is_acyclic(const Matrix& adj, double tol);
bool is_acyclic(const Digraph& g);

// Shared core of ceil(rho |E|) edges lies in both masks; the remaining edges
// alternate m0, m1, m0, ... in a seeded random order.
SupportMasks split_support(const DagGraph& g, double rho, std::uint64_t seed);

// Edge-list text: "# d=<n>" header, then one "parent\tchild" per line.
void write_edge_list(std::ostream& out, const DagGraph& g);
DagGraph read_edge_list(std::istream& in);

}  // namespace zico
