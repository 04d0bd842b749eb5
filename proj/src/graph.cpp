#include "zico/graph.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <queue>
#include <random>
#include <sstream>

#include "zico/error.hpp"

namespace zico {
namespace {

// Kahn's algorithm; returns an empty vector when the graph has a cycle.
std::vector<std::size_t> kahn_order(std::size_t d, const std::vector<std::uint8_t>& adj) {
  std::vector<std::size_t> indegree(d, 0);
  for (std::size_t k = 0; k < d; ++k)
    for (std::size_t j = 0; j < d; ++j)
      if (adj[k * d + j]) ++indegree[j];
  std::queue<std::size_t> ready;
  for (std::size_t j = 0; j < d; ++j)
    if (indegree[j] == 0) ready.push(j);
  std::vector<std::size_t> order;
  order.reserve(d);
  while (!ready.empty()) {
    const std::size_t k = ready.front();
    ready.pop();
    order.push_back(k);
    for (std::size_t j = 0; j < d; ++j)
      if (adj[k * d + j] && --indegree[j] == 0) ready.push(j);
  }
  if (order.size() != d) order.clear();
  return order;
}

}  // namespace

void Digraph::set_edge(std::size_t k, std::size_t j, bool present) {
  if (k >= d_ || j >= d_) throw ParameterError("Digraph::set_edge: node out of range");
  adj_[k * d_ + j] = present ? 1 : 0;
}

std::size_t Digraph::edge_count() const {
  return static_cast<std::size_t>(std::count(adj_.begin(), adj_.end(), std::uint8_t{1}));
}

std::vector<Edge> Digraph::edges() const {
  std::vector<Edge> out;
  for (std::size_t k = 0; k < d_; ++k)
    for (std::size_t j = 0; j < d_; ++j)
      if (has_edge(k, j)) out.push_back({k, j});
  return out;
}

DagGraph::DagGraph(std::size_t d, std::vector<Edge> edges, std::vector<std::size_t> topo_order)
    : d_(d), edges_(std::move(edges)), topo_order_(std::move(topo_order)) {
  if (topo_order_.size() != d_) throw ParameterError("DagGraph: topo_order must list every node");
  std::vector<std::size_t> position(d_, d_);
  for (std::size_t i = 0; i < d_; ++i) {
    const std::size_t v = topo_order_[i];
    if (v >= d_ || position[v] != d_) throw ParameterError("DagGraph: topo_order is not a permutation");
    position[v] = i;
  }
  std::sort(edges_.begin(), edges_.end());
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const Edge& edge = edges_[e];
    if (edge.parent >= d_ || edge.child >= d_) throw ParameterError("DagGraph: edge endpoint out of range");
    if (edge.parent == edge.child) throw ParameterError("DagGraph: self-loop");
    if (e > 0 && edges_[e - 1] == edge) throw ParameterError("DagGraph: duplicate edge");
    if (position[edge.parent] >= position[edge.child])
      throw ParameterError("DagGraph: edge contradicts topological order");
  }
}

DagGraph DagGraph::from_edges(std::size_t d, std::vector<Edge> edges) {
  std::vector<std::uint8_t> adj(d * d, 0);
  for (const Edge& e : edges) {
    if (e.parent >= d || e.child >= d) throw ParameterError("DagGraph: edge endpoint out of range");
    adj[e.parent * d + e.child] = 1;
  }
  std::vector<std::size_t> order = kahn_order(d, adj);
  if (order.empty() && d > 0) throw ParameterError("DagGraph: edge set contains a cycle");
  return DagGraph(d, std::move(edges), std::move(order));
}

std::vector<std::size_t> DagGraph::parents(std::size_t j) const {
  std::vector<std::size_t> out;
  for (const Edge& e : edges_)
    if (e.child == j) out.push_back(e.parent);
  return out;
}

Digraph DagGraph::digraph() const {
  Digraph g(d_);
  for (const Edge& e : edges_) g.set_edge(e.parent, e.child);
  return g;
}

DagGraph generate_er(std::size_t d, double p, std::uint64_t seed) {
  if (d < 2) throw ParameterError("generate_er: need d >= 2");
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("generate_er: p must lie in [0, 1]");
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Edge> edges;
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = a + 1; b < d; ++b)
      if (unit(rng) < p) edges.push_back({order[a], order[b]});
  return DagGraph(d, std::move(edges), std::move(order));
}

DagGraph generate_ba(std::size_t d, std::size_t m, std::uint64_t seed) {
  if (m < 1) throw ParameterError("generate_ba: need m >= 1");
  if (d <= m) throw ParameterError("generate_ba: need d >= m + 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  // Growth in internal labels 0..d-1; attachment weight is degree + 1 so the
  // seed node is reachable.
  std::vector<double> degree(d, 0.0);
  std::vector<Edge> grown;
  for (std::size_t node = 1; node < d; ++node) {
    const std::size_t wanted = std::min(m, node);
    std::vector<std::uint8_t> taken(node, 0);
    for (std::size_t pick = 0; pick < wanted; ++pick) {
      double total = 0.0;
      for (std::size_t k = 0; k < node; ++k)
        if (!taken[k]) total += degree[k] + 1.0;
      double u = unit(rng) * total;
      std::size_t chosen = node;
      for (std::size_t k = 0; k < node; ++k) {
        if (taken[k]) continue;
        chosen = k;
        u -= degree[k] + 1.0;
        if (u < 0.0) break;
      }
      taken[chosen] = 1;
      grown.push_back({chosen, node});
    }
    for (std::size_t k = 0; k < node; ++k)
      if (taken[k]) degree[k] += 1.0;
    degree[node] += static_cast<double>(wanted);
  }
  std::vector<std::size_t> label(d);
  std::iota(label.begin(), label.end(), std::size_t{0});
  std::shuffle(label.begin(), label.end(), rng);
  std::vector<Edge> edges;
  edges.reserve(grown.size());
  for (const Edge& e : grown) edges.push_back({label[e.parent], label[e.child]});
  // Internal label i is the i-th node to arrive, so label[] is a topological order.
  return DagGraph(d, std::move(edges), std::move(label));
}

bool is_acyclic(const Matrix& adj, double tol) {
  if (!adj.square()) throw ParameterError("is_acyclic: matrix must be square");
  const std::size_t d = adj.rows();
  std::vector<std::uint8_t> support(d * d, 0);
  for (std::size_t k = 0; k < d; ++k)
    for (std::size_t j = 0; j < d; ++j) support[k * d + j] = std::abs(adj(k, j)) > tol ? 1 : 0;
  return d == 0 || !kahn_order(d, support).empty();
}

bool is_acyclic(const Digraph& g) {
  const std::size_t d = g.node_count();
  std::vector<std::uint8_t> support(d * d, 0);
  for (std::size_t k = 0; k < d; ++k)
    for (std::size_t j = 0; j < d; ++j) support[k * d + j] = g.has_edge(k, j) ? 1 : 0;
  return d == 0 || !kahn_order(d, support).empty();
}

SupportMasks split_support(const DagGraph& g, double rho, std::uint64_t seed) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw ParameterError("split_support: rho must lie in [0, 1]");
  if (g.edge_count() == 0) throw ParameterError("split_support: graph has no edges");
  std::vector<Edge> edges = g.edges();
  std::mt19937_64 rng(seed);
  std::shuffle(edges.begin(), edges.end(), rng);
  // The small offset keeps e.g. 0.3 * 10 from rounding up to 4.
  const double exact = rho * static_cast<double>(edges.size());
  const auto shared = static_cast<std::size_t>(std::ceil(exact - 1e-9));
  SupportMasks masks{Digraph(g.node_count()), Digraph(g.node_count()), rho};
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const Edge& e = edges[i];
    if (i < shared) {
      masks.m0.set_edge(e.parent, e.child);
      masks.m1.set_edge(e.parent, e.child);
    } else if ((i - shared) % 2 == 0) {
      masks.m0.set_edge(e.parent, e.child);
    } else {
      masks.m1.set_edge(e.parent, e.child);
    }
  }
  return masks;
}

void write_edge_list(std::ostream& out, const DagGraph& g) {
  out << "# d=" << g.node_count() << '\n';
  for (const Edge& e : g.edges()) out << e.parent << '\t' << e.child << '\n';
}

DagGraph read_edge_list(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# d=", 0) != 0)
    throw IoError("edge list: missing '# d=<n>' header");
  std::size_t d = 0;
  try {
    d = static_cast<std::size_t>(std::stoull(line.substr(4)));
  } catch (const std::exception&) {
    throw IoError("edge list: bad node count in header");
  }
  std::vector<Edge> edges;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    Edge e{};
    if (!(fields >> e.parent >> e.child)) throw IoError("edge list: malformed line '" + line + "'");
    edges.push_back(e);
  }
  return DagGraph::from_edges(d, std::move(edges));
}

}  // namespace zico
