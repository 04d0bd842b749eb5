#include <initializer_list>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "zico/error.hpp"
#include "zico/graph.hpp"

using namespace zico;

TEST_CASE("DagGraph validates its topological order") {
  CHECK_NOTHROW(DagGraph(3, {{0, 1}, {1, 2}}, {0, 1, 2}));
  CHECK_THROWS_AS(DagGraph(3, {{1, 0}}, {0, 1, 2}), ParameterError);
  CHECK_THROWS_AS(DagGraph(2, {{0, 0}}, {0, 1}), ParameterError);
  CHECK_THROWS_AS(DagGraph(2, {{0, 1}, {0, 1}}, {0, 1}), ParameterError);
  CHECK_THROWS_AS(DagGraph::from_edges(3, {{0, 1}, {1, 2}, {2, 0}}), ParameterError);
  const DagGraph g = DagGraph::from_edges(4, {{3, 1}, {1, 0}, {3, 2}});
  CHECK(g.parents(1) == std::vector<std::size_t>{3});
  CHECK(g.digraph().edge_count() == 3);
}

TEST_CASE("ER generator") {
  CHECK(generate_er(2, 0.0, 1).edge_count() == 0);
  CHECK(generate_er(5, 1.0, 1).edge_count() == 10);
  double total = 0.0;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const DagGraph g = generate_er(20, 0.25, s);
    CHECK(is_acyclic(g.digraph()));
    total += static_cast<double>(g.edge_count());
  }
  CHECK(std::abs(total / 1000.0 - 0.25 * 190.0) <= 3.0);
  CHECK(generate_er(20, 0.25, 42) == generate_er(20, 0.25, 42));
  CHECK_THROWS_AS(generate_er(5, 1.5, 1), ParameterError);
}

TEST_CASE("BA generator") {
  CHECK(generate_ba(4, 3, 1).edge_count() == 6);
  CHECK(generate_ba(2, 1, 1).edge_count() == 1);
  CHECK(generate_ba(50, 3, 1).edge_count() == 144);
  bool some_non_identity = false;
  for (std::uint64_t s = 0; s < 50; ++s) {
    const DagGraph g = generate_ba(20, 3, s);
    CHECK(g.edge_count() == 54);
    CHECK(is_acyclic(g.digraph()));
    std::vector<std::size_t> id(20);
    std::iota(id.begin(), id.end(), 0);
    some_non_identity |= g.topo_order() != id;
  }
  CHECK(some_non_identity);
  CHECK(generate_ba(20, 3, 9) == generate_ba(20, 3, 9));
}

TEST_CASE("BA degrees follow preferential attachment") {
  // Early nodes collect more children than late ones on average.
  double early = 0.0, late = 0.0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const DagGraph g = generate_ba(30, 2, s);
    const auto& order = g.topo_order();
    std::vector<std::size_t> out(30, 0);
    for (const Edge& e : g.edges()) ++out[e.parent];
    // BA edges go old -> new, so the first nodes of the topological order
    // include the oldest ones.
    early += static_cast<double>(out[order[0]] + out[order[1]] + out[order[2]]);
    late += static_cast<double>(out[order[27]] + out[order[28]] + out[order[29]]);
  }
  CHECK(early > late);
}

TEST_CASE("is_acyclic on weighted matrices") {
  CHECK(is_acyclic(Matrix(3, 3), 0.0));
  Matrix w(2, 2);
  w(0, 1) = 0.5;
  w(1, 0) = 0.5;
  CHECK_FALSE(is_acyclic(w, 0.3));
  w(1, 0) = 0.2;
  CHECK(is_acyclic(w, 0.3));
  for (std::uint64_t s = 0; s < 20; ++s) {
    const DagGraph g = generate_er(12, 0.4, s);
    Matrix m(12, 12);
    for (const Edge& e : g.edges()) m(e.parent, e.child) = -1.3;
    CHECK(is_acyclic(m, 0.0));
  }
}

TEST_CASE("split_support") {
  const DagGraph g10 = generate_er(8, 0.5, 3);
  REQUIRE(g10.edge_count() >= 8);
  std::vector<Edge> first(g10.edges().begin(), g10.edges().begin() + 10 > g10.edges().end()
                                                   ? g10.edges().end()
                                                   : g10.edges().begin() + 10);
  const DagGraph g = DagGraph::from_edges(8, first);

  SupportMasks full = split_support(g, 1.0, 1);
  CHECK(full.m0 == g.digraph());
  CHECK(full.m1 == g.digraph());

  SupportMasks none = split_support(g, 0.0, 1);
  std::size_t both = 0;
  for (const Edge& e : g.edges()) both += none.m0.has_edge(e.parent, e.child) && none.m1.has_edge(e.parent, e.child);
  CHECK(both == 0);
  CHECK(none.m0.edge_count() + none.m1.edge_count() == g.edge_count());

  const DagGraph g8 = DagGraph::from_edges(8, std::vector<Edge>(g.edges().begin(), g.edges().begin() + 8));
  SupportMasks half = split_support(g8, 0.5, 5);
  std::size_t shared = 0, only0 = 0, only1 = 0;
  for (const Edge& e : g8.edges()) {
    const bool a = half.m0.has_edge(e.parent, e.child), b = half.m1.has_edge(e.parent, e.child);
    shared += a && b;
    only0 += a && !b;
    only1 += !a && b;
  }
  CHECK(shared == 4);
  CHECK(only0 == 2);
  CHECK(only1 == 2);
  // Masks never leave the generating graph.
  for (const Edge& e : half.m0.edges()) CHECK(g8.digraph().has_edge(e.parent, e.child));
  CHECK_THROWS_AS(split_support(g8, 1.5, 1), ParameterError);
}

TEST_CASE("edge list round trip") {
  const DagGraph g = generate_ba(15, 2, 4);
  std::stringstream s;
  write_edge_list(s, g);
  const DagGraph back = read_edge_list(s);
  CHECK(back.digraph() == g.digraph());
  std::stringstream bad("# d=2\n0\t1\n1\t0\n");
  CHECK_THROWS(read_edge_list(bad));
}
