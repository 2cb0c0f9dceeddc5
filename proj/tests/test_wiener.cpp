#include <sstream>

#include "catch_amalgamated.hpp"

#include "dpt/lattice.hpp"
#include "dpt/wiener.hpp"

using namespace dpt;
using Catch::Approx;

namespace {
std::vector<WienerScaleRecord> geometric(double first, double ratio, int N) {
  std::vector<WienerScaleRecord> r;
  double t = first;
  for (int n = 1; n <= N; ++n, t *= ratio) {
    WienerScaleRecord s;
    s.n = n;
    s.term_main = t;
    r.push_back(s);
  }
  return r;
}
}  // namespace

TEST_CASE("dyadic scales", "[wiener]") {
  auto lat = lattice_box(2, 8);
  const auto& g = lat.graph;
  const auto o = lat.window.origin();
  const auto one = dyadic_scales(lat, o, VertexSet(g, {}), 1);
  REQUIRE(one.size() == 1);
  CHECK(one[0].r == 2);
  CHECK(one[0].ball == ball(g, o, 2));
  CHECK(one[0].next_ball == ball(g, o, 4));
  CHECK(one[0].clipped.empty());
  CHECK_THROWS_AS(dyadic_scales(lat, o, VertexSet(g, {}), 2), Error);

  auto l3 = lattice_box(3, 9);
  const auto axis = axis_set(l3.graph, l3.window);
  for (const auto& s : dyadic_scales(l3, l3.window.origin(), axis, 2)) {
    CHECK(s.clipped.size() == static_cast<std::size_t>(2 * s.r + 1));
  }
}

TEST_CASE("wiener term", "[wiener]") {
  CHECK(wiener_term(0.0, 2.0, PExponent(2.0)) == 0.0);
  CHECK(wiener_term(3.0, 3.0, PExponent(1.7)) == Approx(1.0));
  CHECK(wiener_term(0.25, 1.0, PExponent(3.0)) == Approx(0.5));
  CHECK_THROWS_AS(wiener_term(1.0, 0.0, PExponent(2.0)), Error);
}

TEST_CASE("classification of term sequences", "[wiener]") {
  CHECK(fit_terms(geometric(0.3, 0.5, 6)).verdict == WienerClass::ConvergingLike);
  CHECK(fit_terms(geometric(0.3, 0.5, 6)).ratio == Approx(0.5));
  CHECK(fit_terms(geometric(0.3, 1.0, 6)).verdict == WienerClass::DivergingLike);
  CHECK(fit_terms(geometric(0.3, 0.85, 6)).verdict == WienerClass::Inconclusive);
  CHECK(fit_terms(geometric(0.3, 0.5, 1)).verdict == WienerClass::Inconclusive);
  auto with_gap = geometric(0.3, 1.0, 4);
  with_gap.back().term_main = 0.0;
  CHECK(fit_terms(with_gap).verdict == WienerClass::ConvergingLike);
}

TEST_CASE("the whole window is thick", "[wiener]") {
  auto lat = lattice_box(2, 17);
  const auto all = VertexSet::all(lat.graph);
  const auto rep = wiener_report(lat, lat.window.origin(), all, PExponent(2.0), 3);
  for (const auto& s : rep.scales) CHECK(s.term_main == Approx(1.0));
  CHECK(rep.fit.verdict == WienerClass::DivergingLike);
  CHECK(rep.scales.back().partial_main == Approx(3.0));
}

TEST_CASE("square-root thorn terms decay", "[wiener]") {
  auto lat = lattice_box(3, 17);
  const auto A = thorn_set(lat.graph, lat.window, ThornProfile::power(0.5));
  WienerOptions wo;
  wo.solver.tol = 1e-9;
  const auto rep = wiener_report(lat, lat.window.origin(), A, PExponent(1.5), 3, wo);
  for (std::size_t i = 1; i < rep.scales.size(); ++i) {
    CHECK(rep.scales[i].term_main < rep.scales[i - 1].term_main);
  }
  CHECK(rep.fit.ratio >= 0.35);
  CHECK(rep.fit.ratio <= 1.0);

  std::ostringstream os;
  write_wiener_csv(os, rep);
  CHECK(os.str().rfind("n,r_n,cap_A,cap_B,vol_B,term_main,term_vd,term_global,partial_main\n", 0) == 0);
  const auto j = to_json(rep);
  CHECK(j.at("scales").size() == 3);
  CHECK_FALSE(j.at("scales").at(0).contains("term_global"));
}

TEST_CASE("global form is opt-in", "[wiener]") {
  auto lat = lattice_box(3, 9);
  const auto axis = axis_set(lat.graph, lat.window);
  WienerOptions wo;
  wo.global_form = true;
  const auto off = wiener_report(lat, lat.window.origin(), axis, PExponent(2.0), 1, wo);
  CHECK(std::isnan(off.scales[0].term_global));
  const auto on = wiener_report(lat, lat.window.origin(), axis, PExponent(2.0), 1, wo, true);
  CHECK(on.global_radius == 8);
  CHECK(on.scales[0].term_global > 0.0);
}
