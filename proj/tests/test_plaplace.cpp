#include <cmath>
#include <sstream>

#include "catch_amalgamated.hpp"

#include "dpt/lattice.hpp"
#include "dpt/oracles.hpp"
#include "dpt/plaplace.hpp"

using namespace dpt;
using Catch::Approx;
using Catch::Matchers::WithinAbs;

namespace {
WeightedGraph path(std::size_t n) {
  std::vector<Edge> e;
  for (Vertex i = 0; i + 1 < n; ++i) e.push_back({i, i + 1, 1.0});
  return build_graph(e, n);
}

VertexSet interior_of(const Lattice& lat) {
  const auto R = lat.window.radius;
  return lat.window.select(lat.graph, [R](const Coord& c) {
    for (auto v : c) {
      if (v == -R || v == R) return false;
    }
    return true;
  });
}
}  // namespace

TEST_CASE("energy and operator on small graphs", "[plaplace]") {
  auto p3 = path(3);
  const std::vector<double> lin = {0.0, 0.5, 1.0};
  const std::vector<double> flat = {0.7, 0.7, 0.7};
  CHECK(p_energy(p3, flat, PExponent(2.5)) == 0.0);
  CHECK(p_energy(p3, lin, PExponent(2.0)) == Approx(0.5));
  CHECK(p_energy(p3, lin, VertexSet::all(p3), PExponent(2.0)) == Approx(0.5));
  CHECK(p_energy(p3, lin, VertexSet(p3, {0, 1}), PExponent(2.0)) == Approx(0.25));

  auto e1 = path(2);
  const std::vector<double> step = {0.0, 1.0};
  CHECK(p_energy(e1, step, PExponent(3.0)) == Approx(1.0));

  for (double p : {1.3, 2.0, 3.7}) {
    CHECK(p_laplacian_at(p3, lin, 1, PExponent(p)) == Approx(0.0).margin(1e-15));
    CHECK(p_laplacian_at(p3, flat, 1, PExponent(p)) == 0.0);
  }

  const std::vector<Edge> star = {{0, 1, 1.0}, {0, 2, 1.0}, {0, 3, 1.0}};
  auto s = build_graph(star, 4);
  const std::vector<double> u = {0.0, 1.0, 1.0, -2.0};
  CHECK(p_laplacian_at(s, u, 0, PExponent(3.0)) == Approx(-2.0 / 3.0));
}

TEST_CASE("p must exceed 1", "[plaplace]") {
  CHECK_THROWS_AS(PExponent(1.0), Error);
  CHECK_THROWS_AS(PExponent(std::nan("")), Error);
  CHECK_FALSE(PExponent(20.0).comfortable());
}

TEST_CASE("dirichlet problems with known answers", "[plaplace]") {
  auto p4 = path(4);
  const VertexSet inner(p4, {1, 2});
  for (double p : {1.5, 2.0, 3.0}) {
    for (auto m : {SolverMethod::GaussSeidel, SolverMethod::Newton}) {
      SolverOptions o;
      o.method = m;
      const std::vector<double> bv = {0.0, 0.0, 0.0, 1.0};
      const auto sol = solve_dirichlet(p4, inner, bv, PExponent(p), o);
      CHECK(sol.converged);
      CHECK_THAT(sol.u[1], WithinAbs(1.0 / 3.0, 1e-8));
      CHECK_THAT(sol.u[2], WithinAbs(2.0 / 3.0, 1e-8));
      CHECK(sol.max_residual <= o.tol);

      const std::vector<double> c(4, 0.25);
      const auto cs = solve_dirichlet(p4, inner, c, PExponent(p), o);
      CHECK(cs.u[1] == 0.25);
      CHECK(cs.max_residual == 0.0);
    }
  }

  // Affine data on a 5x5 grid is harmonic.
  auto lat = lattice_box(2, 2, 1.0);
  const auto in = interior_of(lat);
  std::vector<double> bv(lat.graph.vertex_count());
  for (Vertex v = 0; v < bv.size(); ++v) {
    const auto c = lat.window.coord(v);
    bv[v] = 0.3 * c[0] - 1.2 * c[1];
  }
  const auto sol = solve_dirichlet(lat.graph, in, bv, PExponent(2.0));
  for (Vertex v : in) CHECK_THAT(sol.u[v], WithinAbs(bv[v], 1e-8));
}

TEST_CASE("free components need boundary", "[plaplace]") {
  auto p3 = path(3);
  const std::vector<double> bv(3, 0.0);
  CHECK_THROWS_AS(solve_dirichlet(p3, VertexSet::all(p3), bv, PExponent(2.0)), Error);
  CHECK_THROWS_AS(solve_dirichlet(p3, VertexSet(p3, {}), bv, PExponent(2.0)), Error);
  std::vector<double> nan_bv(3, 0.0);
  nan_bv[0] = std::nan("");
  CHECK_THROWS_AS(solve_dirichlet(p3, VertexSet(p3, {1}), nan_bv, PExponent(2.0)), Error);
}

TEST_CASE("both methods reach the same potential", "[plaplace]") {
  auto lat = lattice_box(2, 6);
  const auto in = interior_of(lat);
  std::vector<double> bv(lat.graph.vertex_count());
  CounterRng rng(3, 0);
  for (auto& v : bv) v = rng.uniform();
  for (double p : {2.0, 2.7}) {
    SolverOptions gs, nt;
    gs.method = SolverMethod::GaussSeidel;
    nt.method = SolverMethod::Newton;
    gs.tol = nt.tol = 1e-11;
    const auto a = solve_dirichlet(lat.graph, in, bv, PExponent(p), gs);
    const auto b = solve_dirichlet(lat.graph, in, bv, PExponent(p), nt);
    REQUIRE(a.converged);
    REQUIRE(b.converged);
    for (Vertex v : in) CHECK_THAT(a.u[v], WithinAbs(b.u[v], 1e-8));
    CHECK(a.energy_closure == Approx(b.energy_closure).epsilon(1e-10));
  }
}

TEST_CASE("coloured sweeps do not depend on the thread count", "[plaplace]") {
  auto lat = lattice_box(2, 8);
  const auto in = interior_of(lat);
  std::vector<double> bv(lat.graph.vertex_count());
  CounterRng rng(9, 0);
  for (auto& v : bv) v = rng.uniform();
  SolverOptions o;
  o.method = SolverMethod::GaussSeidel;
  o.order = SweepOrder::Colored;
  o.threads = 1;
  const auto one = solve_dirichlet(lat.graph, in, bv, PExponent(3.0), o);
  o.threads = 3;
  const auto three = solve_dirichlet(lat.graph, in, bv, PExponent(3.0), o);
  // Colours are independent sets, so the iterates agree bit for bit.
  // Corner vertices lie outside the closure and stay NaN in both.
  REQUIRE(one.u.size() == three.u.size());
  bool same = true;
  for (std::size_t i = 0; i < one.u.size(); ++i) {
    same = same && (one.u[i] == three.u[i] || (std::isnan(one.u[i]) && std::isnan(three.u[i])));
  }
  CHECK(same);
  CHECK(one.sweeps == three.sweeps);
}

TEST_CASE("Green's formula", "[plaplace]") {
  auto lat = lattice_box(2, 2, 1.0);
  const auto& g = lat.graph;
  const auto in = interior_of(lat);
  std::vector<double> f(g.vertex_count()), h(g.vertex_count()), one(g.vertex_count(), 1.0), c(g.vertex_count(), 2.0);
  CounterRng rng(17, 0);
  for (auto& v : f) v = rng.uniform() * 2.0 - 1.0;
  for (auto& v : h) v = rng.uniform() * 2.0 - 1.0;
  const auto r = greens_identity_check(g, in, f, h, PExponent(2.5));
  CHECK(r.abs_gap <= 1e-10);

  const auto cst = greens_identity_check(g, in, c, h, PExponent(2.5));
  CHECK(cst.lhs == 0.0);
  CHECK(cst.rhs == 0.0);

  // With h = 1 only the boundary flux survives.
  auto p5 = path(5);
  const std::vector<double> fp = {0.0, 0.5, 0.1, 0.9, 1.0};
  const std::vector<double> hp(5, 1.0);
  const VertexSet mid(p5, {1, 2, 3});
  const auto b = greens_identity_check(p5, mid, fp, hp, PExponent(3.0));
  const PExponent p3(3.0);
  CHECK(b.rhs == Approx(p3.phi(0.0 - 0.5) + p3.phi(1.0 - 0.9)));
  CHECK(b.abs_gap <= 1e-14);
}

TEST_CASE("energy trace is recorded and nonincreasing", "[plaplace]") {
  auto lat = lattice_box(2, 5);
  const auto in = interior_of(lat);
  std::vector<double> bv(lat.graph.vertex_count());
  CounterRng rng(5, 0);
  for (auto& v : bv) v = rng.uniform();
  SolverOptions o;
  o.record_energy = true;
  o.method = SolverMethod::GaussSeidel;
  const auto s = solve_dirichlet(lat.graph, in, bv, PExponent(2.4), o);
  REQUIRE(s.energy_trace.size() >= 2);
  for (std::size_t k = 1; k < s.energy_trace.size(); ++k) {
    CHECK(s.energy_trace[k] <= s.energy_trace[k - 1] * (1.0 + 1e-12));
  }
}

TEST_CASE("solution csv", "[plaplace]") {
  auto p3 = path(3);
  const std::vector<double> bv = {0.0, 0.0, 1.0};
  const auto s = solve_dirichlet(p3, VertexSet(p3, {1}), bv, PExponent(2.0));
  std::ostringstream os;
  write_solution_csv(os, p3, s, PExponent(2.0));
  CHECK(os.str().rfind("vertex,u,residual\n", 0) == 0);
  std::size_t lines = 0;
  for (char ch : os.str()) lines += ch == '\n';
  CHECK(lines == 4);
}
