#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "dpt/capacity.hpp"
#include "dpt/graph.hpp"
#include "dpt/lattice.hpp"
#include "dpt/oracles.hpp"
#include "dpt/plaplace.hpp"

namespace dpt {

struct CheckOutcome {
  std::string name;
  bool pass = false;
  std::string detail;
};

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

/// Grid box with its outer layer as Dirichlet boundary.
struct BoxProblem {
  Lattice lat;
  VertexSet interior;
  VertexSet rim;
};

inline BoxProblem box_problem(int d, std::int64_t R) {
  auto lat = lattice_box(d, R);
  const auto r = R;
  auto interior = lat.window.select(lat.graph, [r](const Coord& c) {
    for (auto v : c) {
      if (v == -r || v == r) return false;
    }
    return true;
  });
  auto rim = interior.complement();
  return {std::move(lat), std::move(interior), std::move(rim)};
}

inline std::vector<double> random_field(std::size_t n, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  CounterRng rng(seed, 1);
  std::vector<double> f(n);
  for (auto& v : f) v = lo + (hi - lo) * rng.uniform();
  return f;
}

}  // namespace detail

/// The invariant suite behind `selftest`. Each entry is small enough that the
/// whole run takes seconds.
inline std::vector<CheckOutcome> run_property_suite(int threads = 2) {
  std::vector<CheckOutcome> out;
  const std::vector<double> ps = {1.3, 2.0, 2.7};
  SolverOptions tight;
  tight.tol = 1e-11;
  tight.energy_rtol = 1e-13;

  // Maximum and comparison principles on random data.
  {
    bool max_ok = true, cmp_ok = true;
    double worst_cmp = 0.0;
    auto bp = detail::box_problem(2, 5);
    const auto& g = bp.lat.graph;
    for (std::size_t i = 0; i < ps.size(); ++i) {
      const PExponent p(ps[i]);
      auto f = detail::random_field(g.vertex_count(), 11 + i);
      auto h = f;
      const auto bump = detail::random_field(g.vertex_count(), 101 + i, 0.0, 0.5);
      for (Vertex v = 0; v < g.vertex_count(); ++v) h[v] += bump[v];
      const auto uf = solve_dirichlet(g, bp.interior, f, p, tight);
      const auto uh = solve_dirichlet(g, bp.interior, h, p, tight);
      double lo = 1e300, hi = -1e300;
      for (Vertex b : bp.rim) {
        lo = std::min(lo, f[b]);
        hi = std::max(hi, f[b]);
      }
      for (Vertex x : bp.interior) {
        if (uf.u[x] < lo - tight.tol || uf.u[x] > hi + tight.tol) max_ok = false;
        worst_cmp = std::max(worst_cmp, uf.u[x] - uh.u[x]);
      }
    }
    // The slack is the solution error, which the residual bound controls only
    // up to a domain-dependent constant.
    cmp_ok = worst_cmp <= 1e-9;
    out.push_back({"maximum principle", max_ok, "random boundary data, p in {1.3, 2, 2.7}"});
    out.push_back({"comparison principle", cmp_ok, "max(u_f - u_h) = " + detail::fmt(worst_cmp)});
  }

  // Energy never increases across iterations, for both methods.
  {
    bool ok = true;
    double worst = 0.0;
    auto bp = detail::box_problem(2, 6);
    const auto& g = bp.lat.graph;
    for (double pv : ps) {
      for (auto m : {SolverMethod::GaussSeidel, SolverMethod::Newton}) {
        SolverOptions o = tight;
        o.method = m;
        o.record_energy = true;
        // Sweeps for p < 2 are slow to finish; a few hundred still exercise
        // the monotonicity.
        const bool capped = m == SolverMethod::GaussSeidel && pv < 2.0;
        if (capped) o.max_sweeps = 300;
        const auto f = detail::random_field(g.vertex_count(), 5);
        const auto s = solve_dirichlet(g, bp.interior, f, PExponent(pv), o);
        for (std::size_t k = 1; k < s.energy_trace.size(); ++k) {
          const double rise = s.energy_trace[k] - s.energy_trace[k - 1];
          worst = std::max(worst, rise / s.energy_trace[k - 1]);
        }
        ok = ok && (s.converged || capped);
      }
    }
    ok = ok && worst <= 1e-12;
    out.push_back({"energy monotone per sweep", ok, "largest relative rise " + detail::fmt(worst)});
  }

  // Capacity monotonicity, symmetry and homogeneity on a grid annulus.
  {
    auto lat = lattice_box(2, 7);
    const auto& g = lat.graph;
    const auto o = lat.window.origin();
    const auto outer = ball(g, o, 6).complement();
    bool mono = true, sym = true, hom = true;
    double sym_gap = 0.0, hom_gap = 0.0;
    for (double pv : ps) {
      const PExponent p(pv);
      const auto k1 = capacity(g, Condenser{ball(g, o, 1), outer, std::nullopt, p}, tight);
      const auto k2 = capacity(g, Condenser{ball(g, o, 2), outer, std::nullopt, p}, tight);
      mono = mono && k1.value <= k2.value + k1.uncertainty + k2.uncertainty;
      // Growing the free region (sink pushed outwards) lowers the value.
      const auto wide = capacity(g, Condenser{ball(g, o, 1), ball(g, o, 7).complement(), std::nullopt, p}, tight);
      mono = mono && wide.value <= k1.value + wide.uncertainty + k1.uncertainty;
      const auto swapped = capacity(g, Condenser{outer, ball(g, o, 1), std::nullopt, p}, tight);
      sym_gap = std::max(sym_gap, std::abs(swapped.value - k1.value) / k1.value);
      const auto gs = g.scaled(3.5);
      const auto ks = capacity(gs, Condenser{VertexSet(gs, ball(g, o, 1).ids()), VertexSet(gs, outer.ids()),
                                            std::nullopt, p}, tight);
      hom_gap = std::max(hom_gap, std::abs(ks.value - 3.5 * k1.value) / (3.5 * k1.value));
      for (Vertex v = 0; v < g.vertex_count(); ++v) {
        hom_gap = std::max(hom_gap, std::abs(ks.potential.u[v] - k1.potential.u[v]));
      }
    }
    sym = sym_gap <= 1e-8;
    hom = hom_gap <= 1e-8;
    out.push_back({"capacity monotonicity", mono, "larger source raises, larger free region lowers"});
    out.push_back({"capacity symmetry", sym, "relative gap " + detail::fmt(sym_gap)});
    out.push_back({"capacity homogeneity", hom, "weights x3.5, gap " + detail::fmt(hom_gap)});
  }

  // Warm start, sweep order and thread count do not move converged answers.
  {
    auto bp = detail::box_problem(2, 6);
    const auto& g = bp.lat.graph;
    double warm_gap = 0.0, thread_gap = 0.0;
    for (double pv : ps) {
      const PExponent p(pv);
      const bool sweeps_ok = pv >= 2.0;  // coloured sweeps are Gauss-Seidel only
      const auto f = detail::random_field(g.vertex_count(), 21);
      const auto cold = solve_dirichlet(g, bp.interior, f, p, tight);
      const auto junk = detail::random_field(g.vertex_count(), 22, -3.0, 3.0);
      const auto warm = solve_dirichlet(g, bp.interior, f, p, tight, junk);
      if (!sweeps_ok) {
        for (Vertex x : bp.interior) warm_gap = std::max(warm_gap, std::abs(cold.u[x] - warm.u[x]));
        continue;
      }
      SolverOptions par = tight;
      par.order = SweepOrder::Colored;
      par.threads = threads;
      par.method = SolverMethod::GaussSeidel;
      const auto col = solve_dirichlet(g, bp.interior, f, p, par);
      par.threads = 1;
      const auto col1 = solve_dirichlet(g, bp.interior, f, p, par);
      for (Vertex x : bp.interior) {
        warm_gap = std::max(warm_gap, std::abs(cold.u[x] - warm.u[x]));
        thread_gap = std::max(thread_gap, std::abs(col.u[x] - col1.u[x]));
        thread_gap = std::max(thread_gap, std::abs(col.u[x] - cold.u[x]));
      }
    }
    out.push_back({"warm-start invariance", warm_gap <= 1e-9, "max gap " + detail::fmt(warm_gap)});
    out.push_back({"thread-count invariance", thread_gap <= 1e-9, "max gap " + detail::fmt(thread_gap)});
  }

  // Affine rescaling of the data and the residual definition.
  {
    auto bp = detail::box_problem(2, 5);
    const auto& g = bp.lat.graph;
    double gap = 0.0, rgap = 0.0;
    for (double pv : ps) {
      const PExponent p(pv);
      const auto f = detail::random_field(g.vertex_count(), 31);
      auto af = f;
      for (auto& v : af) v = -2.5 * v + 4.0;
      const auto u = solve_dirichlet(g, bp.interior, f, p, tight);
      const auto ua = solve_dirichlet(g, bp.interior, af, p, tight);
      double rmax = 0.0;
      for (Vertex x : bp.interior) {
        gap = std::max(gap, std::abs(ua.u[x] - (-2.5 * u.u[x] + 4.0)));
        rmax = std::max(rmax, std::abs(p_laplacian_at(g, u.u, x, p)));
      }
      rgap = std::max(rgap, std::abs(rmax - u.max_residual));
    }
    // Rescaling changes how the residual bound maps to solution error for p != 2.
    out.push_back({"affine invariance", gap <= 1e-8, "max gap " + detail::fmt(gap)});
    out.push_back({"residual matches pointwise operator", rgap <= 1e-15, "gap " + detail::fmt(rgap)});
  }

  // Green's formula on random functions.
  {
    auto lat = lattice_box(2, 4);
    const auto& g = lat.graph;
    const auto omega = ball(g, lat.window.origin(), 3);
    double worst = 0.0;
    for (std::uint64_t s = 0; s < 5; ++s) {
      const auto f = detail::random_field(g.vertex_count(), 40 + s, -1.0, 1.0);
      const auto h = detail::random_field(g.vertex_count(), 50 + s, -1.0, 1.0);
      for (double pv : {1.3, 2.0, 2.5, 2.7}) worst = std::max(worst, greens_identity_check(g, omega, f, h, PExponent(pv)).abs_gap);
    }
    out.push_back({"Green's identity", worst <= 1e-10, "max gap " + detail::fmt(worst)});
  }
  return out;
}

}  // namespace dpt
