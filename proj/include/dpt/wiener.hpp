#pragma once

#include <cmath>
#include <cstdint>
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

struct DyadicScale {
  int n = 0;
  std::int64_t r = 1;  // 2^n
  VertexSet ball;       // B_n
  VertexSet next_ball;  // B_{n+1}
  VertexSet clipped;    // A ∩ B_n
};

/// Scales n = 1..N with B_n = B(x0, 2^n) and A_n = A ∩ B_n.
inline std::vector<DyadicScale> dyadic_scales(const Lattice& lat, Vertex x0, const VertexSet& A, int N) {
  if (N < 1) fail(ErrorCode::InvalidArgument, "need at least one scale");
  if (N > 30) fail(ErrorCode::SizeOverflow, "too many scales");
  require_same_graph(lat.graph, A);
  require_ball_fits(lat.window, x0, std::int64_t{1} << (N + 1));
  const auto dist = bfs_distances(lat.graph, x0, std::int64_t{1} << (N + 1));
  auto within = [&](std::int64_t r) {
    std::vector<Vertex> ids;
    for (Vertex v = 0; v < dist.size(); ++v) {
      if (dist[v] != kUnreachable && dist[v] <= r) ids.push_back(v);
    }
    return VertexSet(lat.graph, std::move(ids));
  };
  std::vector<DyadicScale> out;
  auto current = within(2);
  for (int n = 1; n <= N; ++n) {
    const std::int64_t r = std::int64_t{1} << n;
    auto next = within(2 * r);
    auto clipped = A.intersected(current);
    out.push_back({n, r, current, next, std::move(clipped)});
    current = std::move(next);
  }
  return out;
}

/// (cap_A / cap_B)^(1/(p-1))
inline double wiener_term(double cap_A, double cap_B, const PExponent& p) {
  if (!(cap_B > 0.0)) fail(ErrorCode::ZeroDenominator, "reference capacity is zero");
  if (cap_A < 0.0) fail(ErrorCode::InvalidArgument, "capacity must be nonnegative");
  if (cap_A == 0.0) return 0.0;
  return std::pow(cap_A / cap_B, p.inv_q());
}

enum class WienerClass { DivergingLike, ConvergingLike, Inconclusive };

inline std::string_view to_string(WienerClass c) {
  switch (c) {
    case WienerClass::DivergingLike: return "diverging-like";
    case WienerClass::ConvergingLike: return "converging-like";
    case WienerClass::Inconclusive: return "inconclusive";
  }
  return "?";
}

struct WienerScaleRecord {
  int n = 0;
  std::int64_t r = 0;
  std::size_t clipped_size = 0;
  double cap_A = 0.0;
  double cap_B = 0.0;
  double vol_B = 0.0;
  double cap_A_global = std::numeric_limits<double>::quiet_NaN();
  double term_main = 0.0;
  double term_vd = 0.0;
  double term_global = std::numeric_limits<double>::quiet_NaN();
  double partial_main = 0.0;
  double partial_vd = 0.0;
  double partial_global = std::numeric_limits<double>::quiet_NaN();
  bool converged = true;
};

struct WienerFit {
  double ratio = 0.0;     // fitted geometric ratio of term_main
  int first_scale = 0;    // fit window
  int last_scale = 0;
  double min_over_first = 0.0;  // min term / first term inside the window
  WienerClass verdict = WienerClass::Inconclusive;
  std::string note;
};

struct WienerOptions {
  SolverOptions solver;
  bool global_form = false;  // also estimate cap_p(A_n) against B_M
  int global_scale = 0;      // M; 0 selects N + 2
  double refuse_low = 0.8;   // no verdict for ratio in [refuse_low, diverge_at)
  double diverge_at = 0.9;
  double bounded_below = 0.5;
};

struct WienerReport {
  Vertex x0 = 0;
  int N = 0;
  double p = 2.0;
  std::int64_t window_radius = 0;
  std::int64_t global_radius = 0;  // 0 when the global form was skipped
  std::vector<WienerScaleRecord> scales;
  WienerFit fit;
};

/// Least-squares fit of log(term) on n over the last ceil(N/2) scales.
inline WienerFit fit_terms(const std::vector<WienerScaleRecord>& recs, const WienerOptions& opt = {}) {
  WienerFit f;
  const std::size_t N = recs.size();
  if (N == 0) return f;
  const std::size_t m = (N + 1) / 2;
  const std::size_t start = N - m;
  f.first_scale = recs[start].n;
  f.last_scale = recs.back().n;
  bool any_zero = false;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = start; i < N; ++i) {
    const double t = recs[i].term_main;
    lo = std::min(lo, t);
    if (!(t > 0.0)) {
      any_zero = true;
      continue;
    }
    const double x = recs[i].n, y = std::log(t);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double first = recs[start].term_main;
  f.min_over_first = first > 0.0 ? lo / first : 0.0;
  if (any_zero) {
    f.ratio = 0.0;
    f.verdict = WienerClass::ConvergingLike;
    f.note = "empty clipped sets inside the fit window";
    return f;
  }
  const double k = static_cast<double>(m);
  if (m == 1) {
    f.ratio = 1.0;
    f.verdict = WienerClass::Inconclusive;
    f.note = "single scale in the fit window";
    return f;
  }
  const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  f.ratio = std::exp(slope);
  if (f.ratio < opt.refuse_low) {
    f.verdict = WienerClass::ConvergingLike;
    f.note = "terms decay geometrically over the fit window";
  } else if (f.ratio >= opt.diverge_at && f.min_over_first >= opt.bounded_below) {
    f.verdict = WienerClass::DivergingLike;
    f.note = "terms stay bounded below over the fit window";
  } else {
    f.verdict = WienerClass::Inconclusive;
    f.note = "fitted ratio too close to 1 for a verdict";
  }
  return f;
}

/// Per-scale capacities and the three term families. `nonparabolic` gates the
/// global form, which only makes sense when cap_p(A_n) is not identically 0.
inline WienerReport wiener_report(const Lattice& lat, Vertex x0, const VertexSet& A, const PExponent& p, int N,
                                  const WienerOptions& opt = {}, std::optional<bool> nonparabolic = std::nullopt) {
  const auto& g = lat.graph;
  const auto scales = dyadic_scales(lat, x0, A, N);
  WienerReport rep;
  rep.x0 = x0;
  rep.N = N;
  rep.p = p.value();
  rep.window_radius = lat.window.radius;

  const bool global = opt.global_form && nonparabolic.value_or(false);
  std::optional<VertexSet> outer;
  if (global) {
    const int M = opt.global_scale > 0 ? opt.global_scale : N + 2;
    if (M <= N) fail(ErrorCode::InvalidArgument, "global scale must exceed N");
    rep.global_radius = std::int64_t{1} << M;
    require_ball_fits(lat.window, x0, rep.global_radius);
    outer = ball(g, x0, rep.global_radius).complement();
  }

  double s_main = 0.0, s_vd = 0.0, s_global = 0.0;
  for (const auto& sc : scales) {
    WienerScaleRecord rec;
    rec.n = sc.n;
    rec.r = sc.r;
    rec.clipped_size = sc.clipped.size();
    const auto sink = sc.next_ball.complement();
    const auto ref = capacity(g, Condenser{sc.ball, sink, std::nullopt, p}, opt.solver);
    rec.cap_B = ref.value;
    rec.converged = ref.potential.converged;
    for (Vertex x : sc.ball) rec.vol_B += g.mu(x);
    if (!sc.clipped.empty()) {
      const auto a = capacity(g, Condenser{sc.clipped, sink, std::nullopt, p}, opt.solver);
      rec.cap_A = a.value;
      rec.converged = rec.converged && a.potential.converged;
      if (global) {
        const auto ga = capacity(g, Condenser{sc.clipped, *outer, std::nullopt, p}, opt.solver);
        rec.cap_A_global = ga.value;
        rec.converged = rec.converged && ga.potential.converged;
      }
    } else if (global) {
      rec.cap_A_global = 0.0;
    }
    const double rp = std::pow(static_cast<double>(sc.r), p.value());
    rec.term_main = wiener_term(rec.cap_A, rec.cap_B, p);
    rec.term_vd = rec.cap_A > 0.0 ? std::pow(rp * rec.cap_A / rec.vol_B, p.inv_q()) : 0.0;
    s_main += rec.term_main;
    s_vd += rec.term_vd;
    rec.partial_main = s_main;
    rec.partial_vd = s_vd;
    if (global) {
      rec.term_global = rec.cap_A_global > 0.0 ? std::pow(rp * rec.cap_A_global / rec.vol_B, p.inv_q()) : 0.0;
      s_global += rec.term_global;
      rec.partial_global = s_global;
    }
    rep.scales.push_back(rec);
  }
  rep.fit = fit_terms(rep.scales, opt);
  return rep;
}

inline void write_wiener_csv(std::ostream& os, const WienerReport& rep) {
  os << "n,r_n,cap_A,cap_B,vol_B,term_main,term_vd,term_global,partial_main\n";
  os.precision(17);
  for (const auto& s : rep.scales) {
    os << s.n << ',' << s.r << ',' << s.cap_A << ',' << s.cap_B << ',' << s.vol_B << ',' << s.term_main << ','
       << s.term_vd << ',';
    if (std::isfinite(s.term_global)) os << s.term_global;
    os << ',' << s.partial_main << '\n';
  }
}

inline nlohmann::json to_json(const WienerReport& rep) {
  nlohmann::json scales = nlohmann::json::array();
  for (const auto& s : rep.scales) {
    nlohmann::json j = {{"n", s.n},           {"r_n", s.r},
                        {"clipped_size", s.clipped_size},
                        {"cap_A", s.cap_A},   {"cap_B", s.cap_B},
                        {"vol_B", s.vol_B},   {"term_main", s.term_main},
                        {"term_vd", s.term_vd}, {"partial_main", s.partial_main},
                        {"partial_vd", s.partial_vd}, {"converged", s.converged}};
    if (std::isfinite(s.term_global)) {
      j["cap_A_global"] = s.cap_A_global;
      j["term_global"] = s.term_global;
      j["partial_global"] = s.partial_global;
    }
    scales.push_back(j);
  }
  nlohmann::json out = {{"x0", rep.x0},
                        {"N", rep.N},
                        {"p", rep.p},
                        {"window_radius", rep.window_radius},
                        {"scales", scales},
                        {"fit",
                         {{"ratio", rep.fit.ratio},
                          {"scales", {rep.fit.first_scale, rep.fit.last_scale}},
                          {"min_over_first", rep.fit.min_over_first},
                          {"classification", std::string(to_string(rep.fit.verdict))},
                          {"note", rep.fit.note}}}};
  if (rep.global_radius > 0) out["global_radius"] = rep.global_radius;
  return out;
}

}  // namespace dpt
