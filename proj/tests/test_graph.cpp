#include "catch_amalgamated.hpp"

#include "dpt/graph.hpp"
#include "dpt/lattice.hpp"

using namespace dpt;
using Catch::Approx;

namespace {
WeightedGraph path(std::size_t n) {
  std::vector<Edge> e;
  for (Vertex i = 0; i + 1 < n; ++i) e.push_back({i, i + 1, 1.0});
  return build_graph(e, n);
}
}  // namespace

TEST_CASE("measure is the sum of incident weights", "[graph]") {
  const std::vector<Edge> one = {{0, 1, 1.0}};
  auto g = build_graph(one, 2);
  CHECK(g.mu(0) == 1.0);
  CHECK(g.mu(1) == 1.0);

  auto p = path(3);
  CHECK(p.mu(1) == 2.0);
  CHECK(p.edge_count() == 2);

  auto lat = lattice_box(2, 2, 0.25);
  CHECK(lat.graph.mu(lat.window.origin()) == Approx(1.0));
}

TEST_CASE("bad edges are rejected", "[graph]") {
  const std::vector<Edge> loop = {{0, 0, 1.0}};
  const std::vector<Edge> zero = {{0, 1, 0.0}};
  const std::vector<Edge> dup = {{0, 1, 1.0}, {1, 0, 2.0}};
  const std::vector<Edge> far = {{0, 5, 1.0}};
  auto code = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Parse;
  };
  CHECK(code([&] { build_graph(loop, 2); }) == ErrorCode::SelfLoop);
  CHECK(code([&] { build_graph(zero, 2); }) == ErrorCode::NonPositiveWeight);
  CHECK(code([&] { build_graph(dup, 2); }) == ErrorCode::DuplicateEdge);
  CHECK(code([&] { build_graph(far, 2); }) == ErrorCode::IdOutOfRange);
}

TEST_CASE("graph distance and balls", "[graph]") {
  auto p = path(3);
  CHECK(graph_distance(p, 0, 2) == 2);
  CHECK(graph_distance(p, 1, 1) == 0);
  CHECK(ball(p, 1, 1).size() == 3);
  CHECK(ball(p, 2, 0) == VertexSet(p, {2}));

  const std::vector<Edge> split = {{0, 1, 1.0}};
  auto two = build_graph(split, 3);
  CHECK_FALSE(graph_distance(two, 0, 2).has_value());

  auto lat = lattice_box(2, 5);
  const auto o = lat.window.origin();
  CHECK(graph_distance(lat.graph, o, lat.window.id({2, 1})) == 3);
  CHECK(ball(lat.graph, o, 2).size() == 13);
}

TEST_CASE("boundaries and closure", "[graph]") {
  auto p = path(3);
  const VertexSet mid(p, {1});
  CHECK(vertex_boundary(p, mid) == VertexSet(p, {0, 2}));
  CHECK(edge_boundary(p, mid).size() == 2);
  CHECK(closure(p, mid).size() == 3);
  CHECK(vertex_boundary(p, VertexSet::all(p)).empty());

  auto lat = lattice_box(2, 4);
  const auto B1 = ball(lat.graph, lat.window.origin(), 1);
  CHECK(vertex_boundary(lat.graph, B1).size() == 8);
}

TEST_CASE("components", "[graph]") {
  auto p = path(3);
  const VertexSet ends(p, {0, 2});
  CHECK(component_of(p, ends, 0) == VertexSet(p, {0}));
  CHECK(components(p, ends).size() == 2);
  CHECK(component_of(p, VertexSet::all(p), 1).size() == 3);
  CHECK_THROWS_AS(component_of(p, ends, 1), Error);

  // Two diagonal quadrants only touch at the origin, which is left out.
  auto lat = lattice_box(2, 4);
  const auto quads = lat.window.select(lat.graph, [](const Coord& c) {
    return (c[0] > 0 && c[1] > 0) || (c[0] < 0 && c[1] < 0);
  });
  const auto q = component_of(lat.graph, quads, lat.window.id({1, 1}));
  CHECK(q.size() == 16);
  for (Vertex v : q) CHECK(lat.window.coord(v)[0] > 0);
}

TEST_CASE("p0 bound", "[graph]") {
  const std::vector<Edge> one = {{0, 1, 1.0}};
  CHECK(check_p0(build_graph(one, 2)) == 1.0);
  CHECK(check_p0(lattice_box(3, 2).graph) == Approx(6.0));
  const std::vector<Edge> star = {{0, 1, 1.0}, {0, 2, 2.0}};
  CHECK(check_p0(build_graph(star, 3)) == Approx(3.0));
}

TEST_CASE("induced subgraph keeps only inner edges", "[graph]") {
  auto p = path(5);
  const VertexSet s(p, {1, 2, 3});
  const auto sub = induced_subgraph(p, s);
  CHECK(sub.graph.vertex_count() == 3);
  CHECK(sub.graph.edge_count() == 2);
  CHECK(sub.graph.mu(0) == 1.0);
}
