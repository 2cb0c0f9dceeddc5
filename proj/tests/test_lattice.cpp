#include "catch_amalgamated.hpp"

#include "dpt/lattice.hpp"

using namespace dpt;
using Catch::Approx;

TEST_CASE("lattice boxes", "[lattice]") {
  auto l1 = lattice_box(1, 1);
  CHECK(l1.graph.vertex_count() == 3);
  CHECK(l1.graph.edge_count() == 2);

  auto l2 = lattice_box(2, 1);
  CHECK(l2.graph.vertex_count() == 9);
  CHECK(l2.graph.edge_count() == 12);

  auto l3 = lattice_box(3, 1, 1.0 / 6.0);
  CHECK(l3.graph.mu(l3.window.origin()) == Approx(1.0));

  auto w = lattice_box(3, 4).window;
  const Coord c = {-1, 3, 2};
  CHECK(w.coord(w.id(c)) == c);
  CHECK_FALSE(w.inside({5, 0, 0}));
}

TEST_CASE("thorns", "[lattice]") {
  auto lat = lattice_box(2, 6);
  const auto& g = lat.graph;
  const auto& w = lat.window;

  const auto spike = thorn_set(g, w, ThornProfile::constant(0));
  CHECK(spike.size() == 7);
  for (Vertex v : spike) CHECK(w.coord(v)[1] == 0);

  const auto wedge = thorn_set(g, w, ThornProfile::linear(1));
  CHECK(wedge.contains(w.id({4, 3})));
  CHECK_FALSE(wedge.contains(w.id({3, 4})));

  auto l3 = lattice_box(3, 6);
  const auto root = thorn_set(l3.graph, l3.window, ThornProfile::power(0.5));
  CHECK(root.contains(l3.window.id({4, 1, 1})));
  CHECK_FALSE(root.contains(l3.window.id({1, 1, 1})));
}

TEST_CASE("cylinders and axes", "[lattice]") {
  auto lat = lattice_box(3, 4);
  const auto& g = lat.graph;
  const auto& w = lat.window;
  CHECK(cylinder_set(g, w, 0, 0) == VertexSet(g, {w.origin()}));
  CHECK(cylinder_set(g, w, 2, 1).size() == 15);

  auto box = lattice_box(2, 3);
  const auto wide = cylinder_set(box.graph, box.window, 3, 3);
  const auto thorn = thorn_set(box.graph, box.window, ThornProfile::constant(3));
  CHECK(wide == thorn);

  auto small = lattice_box(2, 2);
  CHECK(axis_set(small.graph, small.window).size() == 5);
  const auto axis = axis_set(g, w);
  CHECK(axis.size() == 9);
  for (Vertex v : axis) {
    CHECK(w.coord(v)[1] == 0);
    CHECK(w.coord(v)[2] == 0);
  }
  CHECK(axis.intersected(thorn_set(g, w, ThornProfile::constant(0))).size() == 5);
}

TEST_CASE("vertex budget guards huge windows", "[lattice]") {
  CHECK_THROWS_AS(lattice_box(3, 100, 0.0, 1000), Error);
}
