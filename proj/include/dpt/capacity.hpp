#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dpt/error.hpp"
#include "dpt/graph.hpp"
#include "dpt/lattice.hpp"
#include "dpt/plaplace.hpp"

namespace dpt {

/// Source K at potential 1, sink Z at potential 0, inside a domain (all
/// vertices when `domain` is empty).
struct Condenser {
  VertexSet source;
  VertexSet sink;
  std::optional<VertexSet> domain;
  PExponent p{2.0};
};

enum class EnergyConvention {
  FullGraph,  // every edge of the graph counts
  Domain,     // only edges with both endpoints in the domain
};

inline std::string_view to_string(EnergyConvention c) {
  return c == EnergyConvention::FullGraph ? "full-graph" : "domain";
}

struct CapacityResult {
  double value = 0.0;
  double uncertainty = 0.0;
  EnergyConvention convention = EnergyConvention::FullGraph;
  double flux_at_source = 0.0;
  double flux_at_sink = 0.0;
  double sigma_mass_on_K = 0.0;
  PotentialSolution potential;
};

namespace detail {

inline bool whole_graph(const WeightedGraph& g, const Condenser& c) {
  return !c.domain || c.domain->size() == g.vertex_count();
}

inline void check_condenser(const WeightedGraph& g, const Condenser& c) {
  require_same_graph(g, c.source);
  require_same_graph(g, c.sink);
  if (c.source.empty() || c.sink.empty()) fail(ErrorCode::InvalidArgument, "condenser plates must be nonempty");
  if (!c.source.intersected(c.sink).empty()) fail(ErrorCode::SetsIntersect, "source and sink intersect");
  if (c.domain) {
    require_same_graph(g, *c.domain);
    if (!c.source.subset_of(*c.domain) || !c.sink.subset_of(*c.domain)) {
      fail(ErrorCode::InvalidArgument, "condenser plates must lie inside the domain");
    }
  }
}

/// mu(x) Delta_p u(x) counting only neighbours where u is finite, so a field
/// that is NaN off a domain behaves like the induced subgraph.
inline double flux_within(const WeightedGraph& g, std::span<const double> u, Vertex x, const PExponent& p) {
  const auto row = g.neighbors(x);
  const auto w = g.weights(x);
  double s = 0.0;
  for (std::size_t k = 0; k < row.size(); ++k) {
    const double v = u[row[k]];
    if (std::isfinite(v)) s += w[k] * p.phi(v - u[x]);
  }
  return s;
}

inline void require_connected_free(const WeightedGraph& g, const VertexSet& free_set, const std::vector<char>& plate) {
  for (const auto& comp : components(g, free_set)) {
    bool touches = false;
    for (Vertex x : comp) {
      for (Vertex y : g.neighbors(x)) {
        if (plate[y]) {
          touches = true;
          break;
        }
      }
      if (touches) break;
    }
    if (!touches) {
      fail(ErrorCode::DisconnectedFreeComponent,
           "free component containing vertex " + std::to_string(*comp.begin()) + " touches neither plate");
    }
  }
}

}  // namespace detail

/// The p-potential of the condenser: 1 on K, 0 on Z, p-harmonic on the free
/// region. Entries outside the domain are NaN.
inline PotentialSolution condenser_potential(const WeightedGraph& g, const Condenser& c, const SolverOptions& opts = {},
                                             std::span<const double> warm_start = {}) {
  detail::check_condenser(g, c);
  const bool whole = detail::whole_graph(g, c);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  if (whole) {
    std::vector<char> plate(g.vertex_count(), 0);
    std::vector<double> data(g.vertex_count(), nan);
    for (Vertex x : c.source) {
      plate[x] = 1;
      data[x] = 1.0;
    }
    for (Vertex x : c.sink) {
      plate[x] = 1;
      data[x] = 0.0;
    }
    std::vector<Vertex> free_ids;
    for (Vertex v = 0; v < g.vertex_count(); ++v) {
      if (!plate[v]) free_ids.push_back(v);
    }
    PotentialSolution sol;
    if (free_ids.empty()) {
      sol.u = data;
      sol.free_set = VertexSet(g, {});
      sol.converged = true;
    } else {
      VertexSet free_set(g, std::move(free_ids));
      detail::require_connected_free(g, free_set, plate);
      sol = solve_dirichlet(g, free_set, data, c.p, opts, warm_start);
      for (Vertex v = 0; v < g.vertex_count(); ++v) {
        if (plate[v]) sol.u[v] = data[v];
      }
    }
    sol.energy_closure = p_energy(g, sol.u, c.p);
    return sol;
  }

  // Proper domain: solve on the induced subgraph and lift back.
  const auto sub = induced_subgraph(g, *c.domain);
  const auto& h = sub.graph;
  std::vector<char> plate(h.vertex_count(), 0);
  std::vector<double> data(h.vertex_count(), nan);
  for (Vertex x : c.source) {
    const auto l = static_cast<Vertex>(sub.to_local[x]);
    plate[l] = 1;
    data[l] = 1.0;
  }
  for (Vertex x : c.sink) {
    const auto l = static_cast<Vertex>(sub.to_local[x]);
    plate[l] = 1;
    data[l] = 0.0;
  }
  std::vector<Vertex> free_ids;
  for (Vertex v = 0; v < h.vertex_count(); ++v) {
    if (!plate[v]) free_ids.push_back(v);
  }
  PotentialSolution local;
  if (free_ids.empty()) {
    local.u = data;
    local.converged = true;
  } else {
    VertexSet free_set(h, std::move(free_ids));
    detail::require_connected_free(h, free_set, plate);
    std::vector<double> ws;
    if (!warm_start.empty()) {
      ws.resize(h.vertex_count());
      for (Vertex v = 0; v < h.vertex_count(); ++v) ws[v] = warm_start[sub.to_parent[v]];
    }
    local = solve_dirichlet(h, free_set, data, c.p, opts, ws);
    for (Vertex v = 0; v < h.vertex_count(); ++v) {
      if (plate[v]) local.u[v] = data[v];
    }
  }
  PotentialSolution sol = local;
  sol.u.assign(g.vertex_count(), nan);
  std::vector<Vertex> free_parent;
  for (Vertex v = 0; v < h.vertex_count(); ++v) {
    sol.u[sub.to_parent[v]] = local.u[v];
    if (!plate[v]) free_parent.push_back(sub.to_parent[v]);
  }
  sol.free_set = VertexSet(g, std::move(free_parent));
  sol.energy_closure = p_energy(h, local.u, c.p);
  return sol;
}

/// h_{p,t}(u): flux through the edges leaving Gamma_t = {u > t}. With `top`
/// given and t >= 1 the cut is taken around `top` instead (Gamma_1 = K).
/// Edges touching a vertex where u is not finite are ignored.
inline double level_set_flux(const WeightedGraph& g, std::span<const double> u, double t, const PExponent& p,
                             const VertexSet* top = nullptr) {
  std::vector<char> inside(g.vertex_count(), 0);
  if (top && t >= 1.0) {
    for (Vertex x : *top) inside[x] = 1;
  } else {
    for (Vertex x = 0; x < g.vertex_count(); ++x) inside[x] = std::isfinite(u[x]) && u[x] > t;
  }
  double h = 0.0;
  for (Vertex x = 0; x < g.vertex_count(); ++x) {
    if (!inside[x]) continue;
    const auto row = g.neighbors(x);
    const auto w = g.weights(x);
    for (std::size_t k = 0; k < row.size(); ++k) {
      const Vertex y = row[k];
      if (inside[y] || !std::isfinite(u[y])) continue;
      h += w[k] * p.abs_pow_q(std::abs(u[x] - u[y]));
    }
  }
  return h;
}

/// sigma(x) = -Delta_p u(x) mu(x); zero where u is not finite.
inline std::vector<double> sigma_measure(const WeightedGraph& g, std::span<const double> u, const PExponent& p) {
  std::vector<double> s(g.vertex_count(), 0.0);
  for (Vertex x = 0; x < g.vertex_count(); ++x) {
    if (std::isfinite(u[x])) s[x] = -detail::flux_within(g, u, x, p);
  }
  return s;
}

/// Condenser capacity. With no domain (or the whole vertex set) every edge
/// counts; with a proper domain only edges inside it do.
inline CapacityResult capacity(const WeightedGraph& g, const Condenser& c, const SolverOptions& opts = {},
                               std::span<const double> warm_start = {}) {
  CapacityResult r;
  r.potential = condenser_potential(g, c, opts, warm_start);
  r.convention = detail::whole_graph(g, c) ? EnergyConvention::FullGraph : EnergyConvention::Domain;
  const auto& u = r.potential.u;
  r.value = r.potential.energy_closure;
  r.flux_at_source = level_set_flux(g, u, 1.0, c.p, &c.source);
  r.flux_at_sink = level_set_flux(g, u, 0.0, c.p);

  double plate_weight = 0.0;
  const auto src = c.source.mask();
  for (Vertex x : c.source) {
    const auto row = g.neighbors(x);
    const auto w = g.weights(x);
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (!src[row[k]] && std::isfinite(u[row[k]])) plate_weight += w[k];
    }
    r.sigma_mass_on_K -= detail::flux_within(g, u, x, c.p);
  }
  // The first term is the plate-crossing estimate; the second bounds the
  // residual mass sum over the free region, which is what separates the
  // energy from sigma(K).
  double free_mass = 0.0;
  for (Vertex x : r.potential.free_set) free_mass += g.mu(x);
  const double res = r.potential.max_residual;
  r.uncertainty = c.p.value() * res * plate_weight + res * free_mass;
  return r;
}

inline nlohmann::json to_json(const CapacityResult& r, const Condenser& c) {
  return {
      {"value", r.value},
      {"uncertainty", r.uncertainty},
      {"convention", std::string(to_string(r.convention))},
      {"p", c.p.value()},
      {"sizes", {{"source", c.source.size()}, {"sink", c.sink.size()}, {"free", r.potential.free_set.size()}}},
      {"sweeps", r.potential.sweeps},
      {"method", std::string(to_string(r.potential.method))},
      {"converged", r.potential.converged},
      {"max_residual", r.potential.max_residual},
      {"flux_at_source", r.flux_at_source},
      {"flux_at_sink", r.flux_at_sink},
      {"sigma_mass_on_K", r.sigma_mass_on_K},
  };
}

/// True when the closed ball B(x0, r) together with its vertex boundary lies
/// inside the lattice window.
inline bool ball_fits(const LatticeWindow& win, Vertex x0, std::int64_t r) {
  std::int64_t m = 0;
  for (auto c : win.coord(x0)) m = std::max(m, c < 0 ? -c : c);
  return m + r + 1 <= win.radius;
}

inline void require_ball_fits(const LatticeWindow& win, Vertex x0, std::int64_t r) {
  if (!ball_fits(win, x0, r)) {
    fail(ErrorCode::WindowTooSmall, "ball of radius " + std::to_string(r) + " does not fit in window of radius " +
                                        std::to_string(win.radius));
  }
}

/// cap_p(K, B(x0,R)), i.e. sink = window minus the ball.
inline CapacityResult ball_condenser_capacity(const Lattice& lat, const VertexSet& K, Vertex x0, std::int64_t R,
                                              const PExponent& p, const SolverOptions& opts = {},
                                              std::span<const double> warm_start = {}) {
  require_ball_fits(lat.window, x0, R);
  const auto B = ball(lat.graph, x0, R);
  if (!K.subset_of(B)) fail(ErrorCode::WindowTooSmall, "source is not inside the ball");
  return capacity(lat.graph, Condenser{K, B.complement(), std::nullopt, p}, opts, warm_start);
}

struct ExhaustionPoint {
  std::int64_t radius = 0;
  double value = 0.0;
  double uncertainty = 0.0;
  bool converged = false;
};

/// cap_p(K, B(x0,R) ∩ U) along increasing radii, warm-starting each solve from
/// the previous potential. Without U this is cap_p(K, B_R), nonincreasing in R.
inline std::vector<ExhaustionPoint> capacity_exhaustion(const Lattice& lat, const VertexSet& K, Vertex x0,
                                                        const std::optional<VertexSet>& U, const PExponent& p,
                                                        const std::vector<std::int64_t>& radii,
                                                        const SolverOptions& opts = {}) {
  for (std::size_t i = 1; i < radii.size(); ++i) {
    if (radii[i] <= radii[i - 1]) fail(ErrorCode::InvalidArgument, "radii must be increasing");
  }
  for (auto R : radii) require_ball_fits(lat.window, x0, R);
  std::vector<ExhaustionPoint> out;
  std::vector<double> warm;
  for (auto R : radii) {
    auto region = ball(lat.graph, x0, R);
    if (U) region = region.intersected(*U);
    if (!K.subset_of(region)) fail(ErrorCode::WindowTooSmall, "source is not inside B_R ∩ U");
    if (region.size() == K.size()) fail(ErrorCode::InvalidArgument, "source fills the whole region");
    auto r = capacity(lat.graph, Condenser{K, region.complement(), std::nullopt, p}, opts, warm);
    out.push_back({R, r.value, r.uncertainty, r.potential.converged});
    warm = r.potential.u;
    for (auto& v : warm) {
      if (!std::isfinite(v)) v = 0.0;
    }
  }
  return out;
}

struct BallBoundCheck {
  double cap = 0.0;
  double uncertainty = 0.0;
  double upper_bound = 0.0;  // mu(B_R) / (R - r)^p
  bool upper_holds = false;
  double lower_ratio = 0.0;  // cap R^p / mu(B_R)
  bool lower_applicable = false;  // R < 2r
};

inline BallBoundCheck ball_capacity_bounds_check(const Lattice& lat, Vertex x0, std::int64_t r, std::int64_t R,
                                                 const PExponent& p, const SolverOptions& opts = {}) {
  if (!(0 < r && r < R)) fail(ErrorCode::InvalidArgument, "need 0 < r < R");
  const auto& g = lat.graph;
  const auto inner = ball(g, x0, r);
  const auto res = ball_condenser_capacity(lat, inner, x0, R, p, opts);
  double vol = 0.0;
  for (Vertex x : ball(g, x0, R)) vol += g.mu(x);
  BallBoundCheck b;
  b.cap = res.value;
  b.uncertainty = res.uncertainty;
  b.upper_bound = vol / std::pow(static_cast<double>(R - r), p.value());
  b.upper_holds = b.cap - b.uncertainty <= b.upper_bound;
  b.lower_ratio = b.cap * std::pow(static_cast<double>(R), p.value()) / vol;
  b.lower_applicable = R < 2 * r;
  return b;
}

struct SandwichCheck {
  double lhs = 0.0;  // lambda^(p-1) cap(Gamma_lambda, U)
  double mid = 0.0;  // cap(K, U)
  double rhs = 0.0;  // lambda^(p-1) cap(closure Gamma_lambda, U)
  double slack = 0.0;
  bool holds = false;
};

/// Level-set sandwich for the condenser (K, U^c): U is the complement of the
/// sink, and Gamma_lambda = {u > lambda} for the potential u.
inline SandwichCheck level_set_sandwich_check(const WeightedGraph& g, const Condenser& c, double lambda,
                                              const SolverOptions& opts = {}) {
  if (!(lambda > 0.0 && lambda < 1.0)) fail(ErrorCode::InvalidArgument, "lambda must lie in (0,1)");
  const auto base = capacity(g, c, opts);
  const auto& u = base.potential.u;
  std::vector<Vertex> level;
  for (Vertex x = 0; x < g.vertex_count(); ++x) {
    if (std::isfinite(u[x]) && u[x] > lambda) level.push_back(x);
  }
  VertexSet gamma(g, std::move(level));
  VertexSet gamma_bar = closure(g, gamma);
  if (c.domain) gamma_bar = gamma_bar.intersected(*c.domain);
  if (!gamma_bar.intersected(c.sink).empty()) {
    fail(ErrorCode::ClosureEscapesU, "closure of the level set meets the sink");
  }
  const auto lo = capacity(g, Condenser{gamma, c.sink, c.domain, c.p}, opts);
  const auto hi = capacity(g, Condenser{gamma_bar, c.sink, c.domain, c.p}, opts);
  const double scale = std::pow(lambda, c.p.q());
  SandwichCheck s;
  s.lhs = scale * lo.value;
  s.mid = base.value;
  s.rhs = scale * hi.value;
  s.slack = base.uncertainty + scale * (lo.uncertainty + hi.uncertainty);
  s.holds = s.lhs <= s.mid + s.slack && s.mid <= s.rhs + s.slack;
  return s;
}

}  // namespace dpt
