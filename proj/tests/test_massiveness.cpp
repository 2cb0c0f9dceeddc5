#include <sstream>

#include "catch_amalgamated.hpp"

#include "dpt/lattice.hpp"
#include "dpt/massiveness.hpp"

using namespace dpt;
using Catch::Approx;

namespace {
std::vector<SequencePoint> seq_of(std::initializer_list<double> vals) {
  std::vector<SequencePoint> s;
  std::int64_t R = 2;
  for (double v : vals) {
    s.push_back({R, v, 0.0, true});
    R *= 2;
  }
  detail::fill_increments(s);
  return s;
}

VertexSet punctured(const Lattice& lat) { return VertexSet(lat.graph, {lat.window.origin()}).complement(); }
}  // namespace

TEST_CASE("verdict rules", "[massiveness]") {
  CHECK(classify_parabolic(seq_of({1.0, 0.8, 0.6, 0.5}), {}) == ParabolicVerdict::ParabolicLike);
  CHECK(classify_parabolic(seq_of({1.0, 0.8, 0.75, 0.74}), {}) == ParabolicVerdict::NonParabolicLike);
  CHECK(classify_parabolic(seq_of({1.0, 0.95, 0.85, 0.75}), {}) == ParabolicVerdict::Inconclusive);

  MassivenessThresholds th;
  CHECK(classify_massive(seq_of({0.3, 0.5, 0.65, 0.75}), th) == MassiveVerdict::NonMassiveLike);
  CHECK(classify_massive(seq_of({0.3, 0.33, 0.334, 0.336}), th) == MassiveVerdict::MassiveLike);
  CHECK(classify_massive(seq_of({0.17, 0.2, 0.22, 0.235}), th) == MassiveVerdict::MassiveLike);
  CHECK(classify_massive(seq_of({0.9, 0.985, 0.99}), th) == MassiveVerdict::Inconclusive);
}

TEST_CASE("Z^1 capacities are exactly 1/(R+1)", "[massiveness]") {
  auto lat = lattice_box(1, 40);
  const auto o = lat.window.origin();
  const auto ev = parabolicity_sequence(lat, VertexSet(lat.graph, {o}), o, PExponent(2.0), {2, 4, 8, 16, 32});
  for (const auto& s : ev.sequence) CHECK(s.value == Approx(1.0 / static_cast<double>(s.radius + 1)).epsilon(1e-9));
  CHECK(ev.verdict == ParabolicVerdict::ParabolicLike);
  CHECK(ev.monotone);
}

TEST_CASE("parabolicity in two and three dimensions", "[massiveness]") {
  auto l2 = lattice_box(2, 33);
  const auto o2 = l2.window.origin();
  const auto ev2 = parabolicity_sequence(l2, VertexSet(l2.graph, {o2}), o2, PExponent(2.0), {2, 4, 8, 16, 32});
  CHECK(ev2.verdict == ParabolicVerdict::ParabolicLike);

  auto l3 = lattice_box(3, 17);
  const auto o3 = l3.window.origin();
  const auto ev3 = parabolicity_sequence(l3, VertexSet(l3.graph, {o3}), o3, PExponent(2.0), {2, 4, 8, 16});
  CHECK(ev3.verdict == ParabolicVerdict::NonParabolicLike);
  CHECK(ev3.sequence.back().value > 0.3);

  std::ostringstream os;
  write_sequence_csv(os, ev3.sequence);
  CHECK(os.str().rfind("R,value,increment\n", 0) == 0);
}

TEST_CASE("puncture in Z^3 is massive, in Z^2 it is not", "[massiveness]") {
  auto l3 = lattice_box(3, 18);
  const auto x3 = l3.window.id({1, 0, 0});
  const auto m3 = massiveness_sequence(l3, punctured(l3), x3, PExponent(2.0), {2, 4, 8, 16});
  CHECK(m3.monotone);
  CHECK(m3.limit < 0.98);
  CHECK(m3.verdict == MassiveVerdict::MassiveLike);

  auto l2 = lattice_box(2, 66);
  const auto x2 = l2.window.id({1, 0});
  const auto m2 = massiveness_sequence(l2, punctured(l2), x2, PExponent(2.0), {4, 8, 16, 32, 64});
  CHECK(m2.monotone);
  CHECK(m2.verdict == MassiveVerdict::NonMassiveLike);

  CHECK_THROWS_AS(massiveness_sequence(l2, punctured(l2), l2.window.origin(), PExponent(2.0), {4}), Error);
  CHECK_THROWS_AS(massiveness_sequence(l2, punctured(l2), x2, PExponent(2.0), {8, 4}), Error);
}

TEST_CASE("D_p probe on a punctured lattice", "[massiveness]") {
  auto lat = lattice_box(3, 65);
  const auto omega = punctured(lat);
  const auto k0 = lat.window.id({1, 0, 0});
  const auto ev = dp_massiveness_probe(lat, omega, omega, lat.window.origin(), k0, PExponent(2.0), {4, 8, 16});
  for (const auto& s : ev.capacities) CHECK(s.value == Approx(1.0).epsilon(1e-9));
  CHECK(ev.bounded);
  CHECK_FALSE(ev.growing);
  CHECK(ev.verdict == DpVerdict::DpMassiveLike);

  const auto half = lat.window.select(lat.graph, [](const Coord& c) { return c[0] >= 1; });
  CHECK_THROWS_AS(dp_massiveness_probe(lat, half, omega, lat.window.origin(), k0, PExponent(2.0), {2}), Error);
  CHECK_THROWS_AS(dp_massiveness_probe(lat, omega, omega, lat.window.origin(), k0, PExponent(2.0), {17}), Error);
}

TEST_CASE("separating harmonic function", "[massiveness]") {
  // Half-spaces are not massive in Z^d, so the margin decays with R in both
  // dimensions; at moderate R it is still clearly positive.
  auto side = [](const Lattice& lat, int sign) {
    return lat.window.select(lat.graph, [sign](const Coord& c) { return sign * c[0] >= 2; });
  };
  for (int d : {2, 3}) {
    auto lat = lattice_box(d, 33);
    const auto o = lat.window.origin();
    const auto mid = liouville_construct(lat, side(lat, 1), side(lat, -1), o, 16, 4, PExponent(2.0));
    const auto far = liouville_construct(lat, side(lat, 1), side(lat, -1), o, 32, 4, PExponent(2.0));
    CHECK(mid.potential.converged);
    CHECK(mid.margin > 0.15);
    CHECK(far.margin < mid.margin);
    CHECK(far.margin > 0.0);
    CHECK(mid.inf_omega1 > 0.5);
    CHECK(mid.sup_omega2 < 0.5);
  }

  auto l3 = lattice_box(3, 9);
  CHECK_THROWS_AS(
      liouville_construct(l3, side(l3, 1), VertexSet(l3.graph, {}), l3.window.origin(), 8, 2, PExponent(2.0)), Error);
  CHECK_THROWS_AS(liouville_construct(l3, side(l3, 1), side(l3, 1), l3.window.origin(), 8, 2, PExponent(2.0)), Error);
}

TEST_CASE("uniqueness gap", "[massiveness]") {
  auto l3 = lattice_box(3, 18);
  const std::vector<double> zero3(l3.graph.vertex_count(), 0.0);
  const auto x3 = l3.window.id({1, 0, 0});
  const auto g3 = uniqueness_gap_probe(l3, punctured(l3), zero3, x3, 1.0, PExponent(2.0), {4, 8, 16});
  for (const auto& pt : g3.points) {
    CHECK(pt.minimal_sup == Approx(0.0).margin(1e-12));
    CHECK(pt.inflated_sup > 0.5);
  }

  auto l2 = lattice_box(2, 66);
  const std::vector<double> zero2(l2.graph.vertex_count(), 0.0);
  const auto x2 = l2.window.id({1, 0});
  const auto g2 = uniqueness_gap_probe(l2, punctured(l2), zero2, x2, 1.0, PExponent(2.0), {4, 16, 64});
  for (std::size_t i = 1; i < g2.points.size(); ++i) CHECK(g2.points[i].gap_at_x0 < g2.points[i - 1].gap_at_x0);

  const std::vector<double> five(l2.graph.vertex_count(), 5.0);
  const auto c2 = uniqueness_gap_probe(l2, punctured(l2), five, x2, 5.0, PExponent(2.0), {8});
  CHECK(c2.points[0].minimal_at_x0 == Approx(5.0));
  CHECK(c2.points[0].inflated_at_x0 == Approx(5.0));
}
