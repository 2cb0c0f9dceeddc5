#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "dpt/capacity.hpp"
#include "dpt/error.hpp"
#include "dpt/graph.hpp"
#include "dpt/lattice.hpp"
#include "dpt/plaplace.hpp"

namespace dpt {

struct SequencePoint {
  std::int64_t radius = 0;
  double value = 0.0;
  double increment = 0.0;  // value minus previous value (0 for the first)
  bool converged = true;
};

inline void write_sequence_csv(std::ostream& os, const std::vector<SequencePoint>& seq) {
  os << "R,value,increment\n";
  os.precision(17);
  for (const auto& s : seq) os << s.radius << ',' << s.value << ',' << s.increment << '\n';
}

inline nlohmann::json to_json(const std::vector<SequencePoint>& seq) {
  auto a = nlohmann::json::array();
  for (const auto& s : seq) {
    a.push_back({{"R", s.radius}, {"value", s.value}, {"increment", s.increment}, {"converged", s.converged}});
  }
  return a;
}

namespace detail {

inline void check_radii(const std::vector<std::int64_t>& radii) {
  if (radii.empty()) fail(ErrorCode::InvalidArgument, "radii list is empty");
  for (std::size_t i = 1; i < radii.size(); ++i) {
    if (radii[i] <= radii[i - 1]) fail(ErrorCode::InvalidArgument, "radii must be increasing");
  }
}

inline void fill_increments(std::vector<SequencePoint>& seq) {
  for (std::size_t i = 1; i < seq.size(); ++i) seq[i].increment = seq[i].value - seq[i - 1].value;
}

/// True when the last `count` consecutive ratios of `vals` are all <= bound.
inline bool tail_ratios_at_most(const std::vector<double>& vals, std::size_t count, double bound) {
  if (vals.size() < count + 1) return false;
  for (std::size_t i = vals.size() - count; i < vals.size(); ++i) {
    if (!(vals[i - 1] > 0.0) || vals[i] / vals[i - 1] > bound) return false;
  }
  return true;
}

inline bool tail_ratios_at_least(const std::vector<double>& vals, std::size_t count, double bound) {
  if (vals.size() < count + 1) return false;
  for (std::size_t i = vals.size() - count; i < vals.size(); ++i) {
    if (!(vals[i - 1] > 0.0) || vals[i] / vals[i - 1] < bound) return false;
  }
  return true;
}

inline std::vector<double> values_of(const std::vector<SequencePoint>& seq) {
  std::vector<double> v;
  for (const auto& s : seq) v.push_back(s.value);
  return v;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// parabolicity

enum class ParabolicVerdict { ParabolicLike, NonParabolicLike, Inconclusive };

inline std::string_view to_string(ParabolicVerdict v) {
  switch (v) {
    case ParabolicVerdict::ParabolicLike: return "parabolic-like";
    case ParabolicVerdict::NonParabolicLike: return "non-parabolic-like";
    case ParabolicVerdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

struct ParabolicityThresholds {
  std::size_t decay_run = 3;     // consecutive ratios needed
  double decay_ratio = 0.9;
  double flat_fraction = 0.05;   // last |increment| <= fraction * value
};

struct ParabolicityEvidence {
  double p = 2.0;
  std::int64_t window_radius = 0;
  std::vector<SequencePoint> sequence;
  bool monotone = true;
  ParabolicVerdict verdict = ParabolicVerdict::Inconclusive;
  std::string note;
};

inline ParabolicVerdict classify_parabolic(const std::vector<SequencePoint>& seq, const ParabolicityThresholds& th,
                                           std::string* note = nullptr) {
  const auto vals = detail::values_of(seq);
  if (detail::tail_ratios_at_most(vals, th.decay_run, th.decay_ratio)) {
    if (note) *note = "capacities keep shrinking by a fixed factor per scale";
    return ParabolicVerdict::ParabolicLike;
  }
  if (seq.size() >= 2 && seq.back().value > 0.0 &&
      std::abs(seq.back().increment) <= th.flat_fraction * seq.back().value) {
    if (note) *note = "capacities flatten above a positive floor";
    return ParabolicVerdict::NonParabolicLike;
  }
  if (note) *note = "neither sustained decay nor flattening";
  return ParabolicVerdict::Inconclusive;
}

/// cap_p(K, B(x0,R)) for each radius. With `within`, the condensers live on
/// the subgraph induced by that set (K must lie inside it).
inline ParabolicityEvidence parabolicity_sequence(const Lattice& lat, const VertexSet& K, Vertex x0,
                                                  const PExponent& p, const std::vector<std::int64_t>& radii,
                                                  const SolverOptions& opts = {},
                                                  const std::optional<VertexSet>& within = std::nullopt,
                                                  const ParabolicityThresholds& th = {}) {
  detail::check_radii(radii);
  const auto& g = lat.graph;
  for (auto R : radii) require_ball_fits(lat.window, x0, R);
  if (within && !K.subset_of(*within)) fail(ErrorCode::InvalidArgument, "K must lie inside the restricting set");
  ParabolicityEvidence ev;
  ev.p = p.value();
  ev.window_radius = lat.window.radius;
  std::vector<double> warm;
  for (auto R : radii) {
    auto B = ball(g, x0, R);
    if (!K.subset_of(B)) fail(ErrorCode::WindowTooSmall, "K is not inside the smallest ball");
    CapacityResult r;
    if (within) {
      r = capacity(g, Condenser{K, within->minus(B), within, p}, opts, warm);
    } else {
      r = capacity(g, Condenser{K, B.complement(), std::nullopt, p}, opts, warm);
    }
    ev.sequence.push_back({R, r.value, 0.0, r.potential.converged});
    warm = r.potential.u;
    for (auto& v : warm) {
      if (!std::isfinite(v)) v = 0.0;
    }
  }
  detail::fill_increments(ev.sequence);
  for (std::size_t i = 1; i < ev.sequence.size(); ++i) {
    const auto& s = ev.sequence[i];
    if (s.increment > 1e-9 * std::max(1.0, s.value)) ev.monotone = false;
  }
  ev.verdict = classify_parabolic(ev.sequence, th, &ev.note);
  return ev;
}

inline nlohmann::json to_json(const ParabolicityEvidence& ev) {
  return {{"p", ev.p},
          {"window_radius", ev.window_radius},
          {"sequence", to_json(ev.sequence)},
          {"monotone", ev.monotone},
          {"verdict", std::string(to_string(ev.verdict))},
          {"note", ev.note}};
}

// ---------------------------------------------------------------------------
// massiveness

enum class MassiveVerdict { MassiveLike, NonMassiveLike, Inconclusive };

inline std::string_view to_string(MassiveVerdict v) {
  switch (v) {
    case MassiveVerdict::MassiveLike: return "massive-like";
    case MassiveVerdict::NonMassiveLike: return "non-massive-like";
    case MassiveVerdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

struct MassivenessThresholds {
  double margin = 0.02;          // delta: limit must stay below 1 - delta
  double max_increment = 0.005;  // last increment for a massive-like verdict
  std::size_t deficit_run = 3;   // consecutive deficit ratios needed for non-massive-like
  double deficit_ratio = 0.9;
  std::size_t flat_run = 2;      // or: this many deficit ratios at or above flat_ratio
  double flat_ratio = 0.95;
};

struct MassivenessEvidence {
  Vertex x0 = 0;
  double p = 2.0;
  std::int64_t window_radius = 0;
  std::vector<SequencePoint> sequence;  // v_k(x0)
  double limit = 0.0;        // last value plus last increment
  double error_proxy = 0.0;  // last increment
  double margin = 0.0;
  bool monotone = true;
  MassiveVerdict verdict = MassiveVerdict::Inconclusive;
  std::string note;
};

inline MassiveVerdict classify_massive(const std::vector<SequencePoint>& seq, const MassivenessThresholds& th,
                                       double* limit = nullptr, std::string* note = nullptr) {
  if (seq.empty()) return MassiveVerdict::Inconclusive;
  const double last_inc = seq.size() >= 2 ? seq.back().increment : 0.0;
  const double lim = std::min(1.0, seq.back().value + std::max(0.0, last_inc));
  if (limit) *limit = lim;
  std::vector<double> deficit;
  for (const auto& s : seq) deficit.push_back(1.0 - s.value);
  if (detail::tail_ratios_at_most(deficit, th.deficit_run, th.deficit_ratio)) {
    if (note) *note = "1 - v_k keeps shrinking by a fixed factor per scale";
    return MassiveVerdict::NonMassiveLike;
  }
  if (seq.size() >= 2 && lim <= 1.0 - th.margin && std::abs(last_inc) <= th.max_increment) {
    if (note) *note = "v_k settles below 1 - margin";
    return MassiveVerdict::MassiveLike;
  }
  // Slow settling: the increments are still visible but 1 - v_k has stopped
  // shrinking, so the gap to 1 persists.
  if (lim <= 1.0 - th.margin && detail::tail_ratios_at_least(deficit, th.flat_run, th.flat_ratio)) {
    if (note) *note = "1 - v_k flattens out above the margin";
    return MassiveVerdict::MassiveLike;
  }
  if (note) *note = "sequence neither settles below 1 - margin nor approaches 1 steadily";
  return MassiveVerdict::Inconclusive;
}

/// v_k(x0) where v_k is p-harmonic on Omega_k = B(x0,k) ∩ Omega, equal to 1 on
/// the part of its boundary outside Omega and 0 on the part outside the ball.
/// The sequence is nondecreasing in k by the comparison principle.
inline MassivenessEvidence massiveness_sequence(const Lattice& lat, const VertexSet& omega, Vertex x0,
                                                const PExponent& p, const std::vector<std::int64_t>& radii,
                                                const SolverOptions& opts = {},
                                                const MassivenessThresholds& th = {}) {
  detail::check_radii(radii);
  const auto& g = lat.graph;
  require_same_graph(g, omega);
  if (!omega.contains(x0)) fail(ErrorCode::X0OutsideOmega, "x0 is not in Omega");
  for (auto R : radii) require_ball_fits(lat.window, x0, R);
  MassivenessEvidence ev;
  ev.x0 = x0;
  ev.p = p.value();
  ev.window_radius = lat.window.radius;
  ev.margin = th.margin;

  std::vector<double> data(g.vertex_count(), 0.0);
  const auto in = omega.mask();
  for (Vertex v = 0; v < g.vertex_count(); ++v) data[v] = in[v] ? 0.0 : 1.0;
  std::vector<double> warm;
  for (auto R : radii) {
    const auto region = ball(g, x0, R).intersected(omega);
    const auto sol = solve_dirichlet(g, region, data, p, opts, warm);
    ev.sequence.push_back({R, sol.u[x0], 0.0, sol.converged});
    warm = sol.u;
    for (auto& v : warm) {
      if (!std::isfinite(v)) v = 0.0;
    }
  }
  detail::fill_increments(ev.sequence);
  const double slack = 2.0 * opts.tol;
  for (std::size_t i = 1; i < ev.sequence.size(); ++i) {
    if (ev.sequence[i].increment < -slack) ev.monotone = false;
  }
  ev.error_proxy = ev.sequence.size() >= 2 ? std::abs(ev.sequence.back().increment) : 1.0;
  ev.verdict = classify_massive(ev.sequence, th, &ev.limit, &ev.note);
  return ev;
}

inline nlohmann::json to_json(const MassivenessEvidence& ev) {
  return {{"x0", ev.x0},
          {"p", ev.p},
          {"window_radius", ev.window_radius},
          {"sequence", to_json(ev.sequence)},
          {"limit", ev.limit},
          {"error_proxy", ev.error_proxy},
          {"margin", ev.margin},
          {"monotone", ev.monotone},
          {"verdict", std::string(to_string(ev.verdict))},
          {"note", ev.note}};
}

// ---------------------------------------------------------------------------
// D_p-massiveness

enum class DpVerdict { DpMassiveLike, NotDpMassiveLike, Inconclusive };

inline std::string_view to_string(DpVerdict v) {
  switch (v) {
    case DpVerdict::DpMassiveLike: return "Dp-massive-like";
    case DpVerdict::NotDpMassiveLike: return "not-Dp-massive-like";
    case DpVerdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

struct DpProbeThresholds {
  double flat_fraction = 0.05;  // bounded: last increment <= fraction * value
  std::size_t growth_run = 3;   // consecutive ratios needed for growth
  double growth_ratio = 1.25;
  // Omega^c is cut off at the window edge, which flattens the capacities once
  // R nears the window radius; radii must leave this much room.
  std::int64_t room = 4;
};

struct DpMassivenessEvidence {
  double p = 2.0;
  std::int64_t window_radius = 0;
  ParabolicityEvidence omega1_parabolicity;
  std::vector<SequencePoint> capacities;  // cap_p(Omega1 ∩ B_R, Omega) inside the window
  bool bounded = false;
  bool growing = false;
  DpVerdict verdict = DpVerdict::Inconclusive;
  std::string note;
};

/// Evidence for cap_p(Omega1, Omega) < infinity with Omega1 not p-parabolic.
/// The capacities use the whole window as domain (free boundary at the
/// window's edge), so radii are limited to a fraction of the window.
inline DpMassivenessEvidence dp_massiveness_probe(const Lattice& lat, const VertexSet& omega, const VertexSet& omega1,
                                                  Vertex center, Vertex k0, const PExponent& p,
                                                  const std::vector<std::int64_t>& radii,
                                                  const SolverOptions& opts = {}, const DpProbeThresholds& th = {},
                                                  const ParabolicityThresholds& pth = {}) {
  detail::check_radii(radii);
  const auto& g = lat.graph;
  require_same_graph(g, omega);
  require_same_graph(g, omega1);
  if (!omega1.subset_of(omega)) fail(ErrorCode::Omega1NotSubset, "Omega1 is not a subset of Omega");
  if (!omega1.contains(k0)) fail(ErrorCode::XNotInSet, "reference vertex is not in Omega1");
  for (auto R : radii) require_ball_fits(lat.window, center, th.room * R);

  DpMassivenessEvidence ev;
  ev.p = p.value();
  ev.window_radius = lat.window.radius;
  ev.omega1_parabolicity =
      parabolicity_sequence(lat, VertexSet(g, {k0}), center, p, radii, opts, omega1, pth);

  const auto sink = omega.complement();
  std::vector<double> warm;
  for (auto R : radii) {
    const auto K = omega1.intersected(ball(g, center, R));
    if (K.empty()) fail(ErrorCode::InvalidArgument, "Omega1 misses the ball of radius " + std::to_string(R));
    if (sink.empty()) {
      ev.capacities.push_back({R, 0.0, 0.0, true});
      continue;
    }
    const auto r = capacity(g, Condenser{K, sink, std::nullopt, p}, opts, warm);
    ev.capacities.push_back({R, r.value, 0.0, r.potential.converged});
    warm = r.potential.u;
    for (auto& v : warm) {
      if (!std::isfinite(v)) v = 0.0;
    }
  }
  detail::fill_increments(ev.capacities);
  const auto& last = ev.capacities.back();
  ev.bounded = ev.capacities.size() >= 2 && last.increment <= th.flat_fraction * std::max(last.value, 0.0);
  if (sink.empty()) ev.bounded = true;
  ev.growing = detail::tail_ratios_at_least(detail::values_of(ev.capacities), th.growth_run, th.growth_ratio);

  const auto pv = ev.omega1_parabolicity.verdict;
  if (ev.growing) {
    ev.verdict = DpVerdict::NotDpMassiveLike;
    ev.note = "capacity of Omega1 ∩ B_R relative to Omega keeps growing";
  } else if (pv == ParabolicVerdict::ParabolicLike) {
    ev.verdict = DpVerdict::NotDpMassiveLike;
    ev.note = "Omega1 looks p-parabolic";
  } else if (ev.bounded && pv == ParabolicVerdict::NonParabolicLike) {
    ev.verdict = DpVerdict::DpMassiveLike;
    ev.note = "Omega1 non-parabolic-like with bounded capacity";
  } else {
    ev.verdict = DpVerdict::Inconclusive;
    ev.note = "capacity sequence neither bounded nor clearly growing, or Omega1 undecided";
  }
  return ev;
}

inline nlohmann::json to_json(const DpMassivenessEvidence& ev) {
  return {{"p", ev.p},
          {"window_radius", ev.window_radius},
          {"omega1_parabolicity", to_json(ev.omega1_parabolicity)},
          {"capacities", to_json(ev.capacities)},
          {"bounded", ev.bounded},
          {"growing", ev.growing},
          {"verdict", std::string(to_string(ev.verdict))},
          {"note", ev.note}};
}

// ---------------------------------------------------------------------------
// constructions

struct LiouvilleReport {
  std::int64_t radius = 0;
  PotentialSolution potential;
  double sup_omega1 = 0.0;  // over the Omega1 core
  double inf_omega1 = 0.0;
  double sup_omega2 = 0.0;  // over the Omega2 core
  double inf_omega2 = 0.0;
  double margin = 0.0;      // inf over Omega1 core minus sup over Omega2 core
  std::size_t core1_size = 0;
  std::size_t core2_size = 0;
};

/// Truncated rendering of the bounded p-harmonic function built from two
/// disjoint sets: p-harmonic on B(x0,R), equal to 1 on the part of the
/// boundary inside Omega1 and 0 elsewhere. Cores are the points of each set
/// inside B(x0, core_radius).
inline LiouvilleReport liouville_construct(const Lattice& lat, const VertexSet& omega1, const VertexSet& omega2,
                                           Vertex x0, std::int64_t R, std::int64_t core_radius, const PExponent& p,
                                           const SolverOptions& opts = {}) {
  const auto& g = lat.graph;
  require_same_graph(g, omega1);
  require_same_graph(g, omega2);
  if (omega1.empty() || omega2.empty()) fail(ErrorCode::InvalidArgument, "both sets must be nonempty");
  if (!omega1.intersected(omega2).empty()) fail(ErrorCode::SetsIntersect, "Omega1 and Omega2 intersect");
  if (!(core_radius >= 0 && core_radius < R)) fail(ErrorCode::InvalidArgument, "need 0 <= core radius < R");
  require_ball_fits(lat.window, x0, R);
  const auto B = ball(g, x0, R);
  std::vector<double> data(g.vertex_count(), 0.0);
  for (Vertex x : omega1) data[x] = 1.0;
  LiouvilleReport rep;
  rep.radius = R;
  rep.potential = solve_dirichlet(g, B, data, p, opts);
  const auto core = ball(g, x0, core_radius);
  const auto c1 = omega1.intersected(core), c2 = omega2.intersected(core);
  if (c1.empty() || c2.empty()) fail(ErrorCode::InvalidArgument, "core ball misses one of the sets");
  rep.core1_size = c1.size();
  rep.core2_size = c2.size();
  const auto& u = rep.potential.u;
  auto range = [&](const VertexSet& s, double& lo, double& hi) {
    lo = std::numeric_limits<double>::infinity();
    hi = -lo;
    for (Vertex x : s) {
      lo = std::min(lo, u[x]);
      hi = std::max(hi, u[x]);
    }
  };
  range(c1, rep.inf_omega1, rep.sup_omega1);
  range(c2, rep.inf_omega2, rep.sup_omega2);
  rep.margin = rep.inf_omega1 - rep.sup_omega2;
  return rep;
}

inline nlohmann::json to_json(const LiouvilleReport& r) {
  return {{"R", r.radius},
          {"margin", r.margin},
          {"omega1_core", {{"size", r.core1_size}, {"inf", r.inf_omega1}, {"sup", r.sup_omega1}}},
          {"omega2_core", {{"size", r.core2_size}, {"inf", r.inf_omega2}, {"sup", r.sup_omega2}}},
          {"converged", r.potential.converged},
          {"max_residual", r.potential.max_residual}};
}

struct UniquenessGapPoint {
  std::int64_t radius = 0;
  double minimal_at_x0 = 0.0;   // outer data inf f
  double inflated_at_x0 = 0.0;  // outer data c
  double minimal_sup = 0.0;
  double inflated_sup = 0.0;
  double gap_at_x0 = 0.0;
};

struct UniquenessGapReport {
  double c = 1.0;
  std::vector<UniquenessGapPoint> points;
};

/// Two solutions of the exterior problem on Omega_k = B(x0,k) ∩ Omega with
/// data f on the part of the boundary outside Omega: the minimal one (outer
/// data inf f) and the inflated one (outer data c). `f` is a full-length field
/// read on the complement of Omega.
inline UniquenessGapReport uniqueness_gap_probe(const Lattice& lat, const VertexSet& omega, std::span<const double> f,
                                                Vertex x0, double c, const PExponent& p,
                                                const std::vector<std::int64_t>& radii,
                                                const SolverOptions& opts = {}) {
  detail::check_radii(radii);
  const auto& g = lat.graph;
  require_same_graph(g, omega);
  if (f.size() != g.vertex_count()) fail(ErrorCode::InvalidArgument, "boundary field must have one entry per vertex");
  if (!omega.contains(x0)) fail(ErrorCode::X0OutsideOmega, "x0 is not in Omega");
  for (auto R : radii) require_ball_fits(lat.window, x0, R);
  const auto in = omega.mask();
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (Vertex v = 0; v < g.vertex_count(); ++v) {
    if (in[v]) continue;
    if (!std::isfinite(f[v])) fail(ErrorCode::NonFinite, "boundary data is not finite");
    lo = std::min(lo, f[v]);
    hi = std::max(hi, f[v]);
  }
  if (!std::isfinite(lo)) lo = hi = 0.0;
  if (c < hi) fail(ErrorCode::InvalidArgument, "inflation level must be at least sup f");
  UniquenessGapReport rep;
  rep.c = c;
  std::vector<double> low(g.vertex_count()), high(g.vertex_count());
  for (Vertex v = 0; v < g.vertex_count(); ++v) {
    low[v] = in[v] ? lo : f[v];
    high[v] = in[v] ? c : f[v];
  }
  for (auto R : radii) {
    const auto region = ball(g, x0, R).intersected(omega);
    const auto a = solve_dirichlet(g, region, low, p, opts);
    const auto b = solve_dirichlet(g, region, high, p, opts);
    UniquenessGapPoint pt;
    pt.radius = R;
    pt.minimal_at_x0 = a.u[x0];
    pt.inflated_at_x0 = b.u[x0];
    pt.minimal_sup = -std::numeric_limits<double>::infinity();
    pt.inflated_sup = pt.minimal_sup;
    for (Vertex x : region) {
      pt.minimal_sup = std::max(pt.minimal_sup, a.u[x]);
      pt.inflated_sup = std::max(pt.inflated_sup, b.u[x]);
    }
    pt.gap_at_x0 = pt.inflated_at_x0 - pt.minimal_at_x0;
    rep.points.push_back(pt);
  }
  return rep;
}

inline nlohmann::json to_json(const UniquenessGapReport& r) {
  auto a = nlohmann::json::array();
  for (const auto& pt : r.points) {
    a.push_back({{"R", pt.radius},
                 {"minimal_at_x0", pt.minimal_at_x0},
                 {"inflated_at_x0", pt.inflated_at_x0},
                 {"minimal_sup", pt.minimal_sup},
                 {"inflated_sup", pt.inflated_sup},
                 {"gap_at_x0", pt.gap_at_x0}});
  }
  return {{"c", r.c}, {"points", a}};
}

}  // namespace dpt
