#include <cmath>

#include "catch_amalgamated.hpp"

#include "dpt/capacity.hpp"
#include "dpt/lattice.hpp"

using namespace dpt;
using Catch::Approx;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
WeightedGraph path(std::size_t n, double w = 1.0) {
  std::vector<Edge> e;
  for (Vertex i = 0; i + 1 < n; ++i) e.push_back({i, i + 1, w});
  return build_graph(e, n);
}

Condenser ends(const WeightedGraph& g, double p) {
  return Condenser{VertexSet(g, {0}), VertexSet(g, {static_cast<Vertex>(g.vertex_count() - 1)}), std::nullopt,
                   PExponent(p)};
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Parse;
}
}  // namespace

TEST_CASE("two vertices", "[capacity]") {
  auto g = path(2, 2.5);
  for (double p : {1.2, 2.0, 4.0}) {
    const auto c = ends(g, p);
    const auto r = capacity(g, c);
    CHECK(r.value == Approx(2.5));
    CHECK(r.potential.u[0] == 1.0);
    CHECK(r.potential.u[1] == 0.0);
    CHECK(sigma_measure(g, r.potential.u, c.p)[0] == Approx(2.5));
  }
}

TEST_CASE("series law on a path", "[capacity]") {
  auto g = path(11);
  for (double p : {1.5, 2.0, 3.0}) {
    const auto c = ends(g, p);
    const auto r = capacity(g, c);
    const double expect = std::pow(10.0, 1.0 - p);
    CHECK_THAT(r.value, WithinRel(expect, 1e-6));
    CHECK(r.uncertainty < 1e-6 * expect);
    CHECK_THAT(r.sigma_mass_on_K, WithinRel(expect, 1e-6));
    for (double t = 0.0; t <= 1.0; t += 0.125) {
      CHECK_THAT(level_set_flux(g, r.potential.u, t, c.p, &c.source), WithinRel(expect, 1e-7));
    }
    const auto s = sigma_measure(g, r.potential.u, c.p);
    for (Vertex v = 1; v < 10; ++v) CHECK(std::abs(s[v]) <= 1e-9);
  }

  auto p5 = path(5);
  const auto u = condenser_potential(p5, ends(p5, 2.6)).u;
  for (Vertex v = 0; v < 5; ++v) CHECK_THAT(u[v], WithinAbs(1.0 - 0.25 * v, 1e-9));

  const std::vector<double> flat(11, 0.4);
  CHECK(level_set_flux(g, flat, 0.2, PExponent(2.0)) == 0.0);
}

TEST_CASE("parallel law", "[capacity]") {
  // Plates joined directly by two edges, and by two disjoint two-edge paths.
  const std::vector<Edge> fork = {{0, 1, 1.5}, {0, 2, 2.5}};
  auto g = build_graph(fork, 3);
  const std::vector<Edge> loop = {{0, 1, 1.0}, {1, 3, 1.0}, {0, 2, 1.0}, {2, 3, 1.0}};
  auto h = build_graph(loop, 4);
  for (double p : {1.5, 2.0, 3.0}) {
    CHECK(capacity(g, Condenser{VertexSet(g, {0}), VertexSet(g, {1, 2}), std::nullopt, PExponent(p)}).value ==
          Approx(4.0));
    CHECK_THAT(capacity(h, ends(h, p)).value, WithinRel(2.0 * std::pow(2.0, 1.0 - p), 1e-8));
  }
}

TEST_CASE("annulus potential is symmetric under rotation", "[capacity]") {
  auto lat = lattice_box(2, 7);
  const auto& g = lat.graph;
  const auto& w = lat.window;
  const auto o = w.origin();
  const Condenser c{ball(g, o, 1), ball(g, o, 6).complement(), std::nullopt, PExponent(2.0)};
  SolverOptions opts;
  opts.tol = 1e-12;
  const auto u = condenser_potential(g, c, opts).u;
  for (Vertex v = 0; v < g.vertex_count(); ++v) {
    const auto xy = w.coord(v);
    const auto r = w.id({-xy[1], xy[0]});
    CHECK(std::abs(u[v] - u[r]) <= 1e-8);
  }
}

TEST_CASE("domain convention drops outside edges", "[capacity]") {
  // 0-1-2-3 with a shortcut 0-3 that leaves the domain through vertex 4.
  const std::vector<Edge> e = {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {0, 4, 1.0}, {4, 3, 1.0}};
  auto g = build_graph(e, 5);
  const VertexSet K(g, {0}), Z(g, {3});
  const auto full = capacity(g, Condenser{K, Z, std::nullopt, PExponent(2.0)});
  CHECK(full.value == Approx(1.0 / 3.0 + 0.5));
  CHECK(full.convention == EnergyConvention::FullGraph);
  const auto dom = capacity(g, Condenser{K, Z, VertexSet(g, {0, 1, 2, 3}), PExponent(2.0)});
  CHECK(dom.value == Approx(1.0 / 3.0));
  CHECK(dom.convention == EnergyConvention::Domain);
  CHECK(std::isnan(dom.potential.u[4]));
}

TEST_CASE("condenser preconditions", "[capacity]") {
  auto g = path(5);
  CHECK(code_of([&] {
          capacity(g, Condenser{VertexSet(g, {0, 1}), VertexSet(g, {1, 4}), std::nullopt, PExponent(2.0)});
        }) == ErrorCode::SetsIntersect);
  const std::vector<Edge> e = {{0, 1, 1.0}, {2, 3, 1.0}};
  auto split = build_graph(e, 4);
  CHECK(code_of([&] {
          capacity(split, Condenser{VertexSet(split, {0}), VertexSet(split, {1}), std::nullopt, PExponent(2.0)});
        }) == ErrorCode::DisconnectedFreeComponent);
}

TEST_CASE("capacity against growing balls", "[capacity]") {
  auto lat = lattice_box(2, 17);
  const auto o = lat.window.origin();
  const VertexSet K(lat.graph, {o});
  const auto seq = capacity_exhaustion(lat, K, o, std::nullopt, PExponent(2.0), {2, 4, 8, 16});
  REQUIRE(seq.size() == 4);
  for (std::size_t i = 1; i < seq.size(); ++i) {
    CHECK(seq[i].value < seq[i - 1].value);
    // Two-dimensional recurrence: cap(o, B_R) behaves like c / log R.
    const double ratio = seq[i].value / seq[i - 1].value;
    const double expect = std::log(static_cast<double>(seq[i - 1].radius)) / std::log(static_cast<double>(seq[i].radius));
    CHECK(ratio < 2.0 * expect);
    CHECK(ratio > 0.5 * expect);
  }

  auto small = lattice_box(2, 3);
  const auto everything = ball(small.graph, small.window.origin(), 2);
  CHECK_THROWS_AS(capacity_exhaustion(small, everything, small.window.origin(), everything, PExponent(2.0), {2}),
                  Error);
  CHECK(code_of([&] {
          capacity_exhaustion(small, VertexSet(small.graph, {small.window.origin()}), small.window.origin(),
                              std::nullopt, PExponent(2.0), {5});
        }) == ErrorCode::WindowTooSmall);
}

TEST_CASE("ball capacity upper bound", "[capacity]") {
  auto l2 = lattice_box(2, 10);
  const auto b = ball_capacity_bounds_check(l2, l2.window.origin(), 4, 8, PExponent(2.0));
  CHECK(b.upper_holds);
  CHECK(b.cap < b.upper_bound);

  auto l3 = lattice_box(3, 10);
  const auto c = ball_capacity_bounds_check(l3, l3.window.origin(), 5, 9, PExponent(1.5));
  CHECK(c.upper_holds);
  CHECK(c.lower_applicable);
  CHECK(c.lower_ratio > 0.0);

  const auto tight = ball_capacity_bounds_check(l2, l2.window.origin(), 7, 8, PExponent(2.0));
  CHECK(tight.upper_holds);
  CHECK_THROWS_AS(ball_capacity_bounds_check(l2, l2.window.origin(), 8, 8, PExponent(2.0)), Error);
}

TEST_CASE("level set sandwich", "[capacity]") {
  auto g = path(9);
  const auto s = level_set_sandwich_check(g, ends(g, 2.0), 0.5);
  CHECK(s.holds);
  CHECK(s.lhs <= s.mid + s.slack);
  CHECK(s.mid <= s.rhs + s.slack);

  auto lat = lattice_box(2, 8);
  const auto o = lat.window.origin();
  const Condenser ann{ball(lat.graph, o, 1), ball(lat.graph, o, 6).complement(), std::nullopt, PExponent(2.0)};
  CHECK(level_set_sandwich_check(lat.graph, ann, 0.3).holds);
  CHECK_THROWS_AS(level_set_sandwich_check(lat.graph, ann, 1.0), Error);

  // On a two-vertex graph every level set is K and its closure reaches the sink.
  auto two = path(2);
  CHECK(code_of([&] { level_set_sandwich_check(two, ends(two, 2.0), 0.5); }) == ErrorCode::ClosureEscapesU);
}

TEST_CASE("ball fits the window", "[capacity]") {
  auto lat = lattice_box(2, 10);
  CHECK(ball_fits(lat.window, lat.window.origin(), 9));
  CHECK_FALSE(ball_fits(lat.window, lat.window.origin(), 10));
  CHECK_FALSE(ball_fits(lat.window, lat.window.id({3, 0}), 7));
}
