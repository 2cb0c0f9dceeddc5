#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "dpt/capacity.hpp"
#include "dpt/error.hpp"
#include "dpt/graph.hpp"
#include "dpt/plaplace.hpp"

namespace dpt {

struct OracleResult {
  std::vector<double> values;
  std::string method;
  double tolerance = 0.0;
  std::size_t samples = 0;
  double stderr_estimate = 0.0;
};

/// p = 2 Dirichlet problem as a sparse SPD system, solved by LDL^T. Shares
/// nothing with the nonlinear solver beyond the graph. Returns a full-length
/// field, NaN outside the closure of omega.
inline OracleResult linear_dirichlet_p2(const WeightedGraph& g, const VertexSet& omega,
                                        std::span<const double> boundary_values) {
  require_same_graph(g, omega);
  if (omega.empty()) fail(ErrorCode::InvalidArgument, "free set is empty");
  const std::size_t n = omega.size();
  std::vector<std::int64_t> local(g.vertex_count(), -1);
  for (std::size_t i = 0; i < n; ++i) local[omega.ids()[i]] = static_cast<std::int64_t>(i);

  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  std::vector<char> touches(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const Vertex x = omega.ids()[i];
    const auto row = g.neighbors(x);
    const auto w = g.weights(x);
    double diag = 0.0;
    for (std::size_t k = 0; k < row.size(); ++k) {
      diag += w[k];
      const std::int64_t j = local[row[k]];
      if (j >= 0) {
        trip.emplace_back(static_cast<int>(i), static_cast<int>(j), -w[k]);
      } else {
        const double b = boundary_values[row[k]];
        if (!std::isfinite(b)) fail(ErrorCode::NonFinite, "boundary value is not finite");
        rhs[static_cast<Eigen::Index>(i)] += w[k] * b;
        touches[i] = 1;
      }
    }
    trip.emplace_back(static_cast<int>(i), static_cast<int>(i), diag);
  }
  for (const auto& comp : components(g, omega)) {
    bool ok = false;
    for (Vertex x : comp) ok = ok || touches[static_cast<std::size_t>(local[x])];
    if (!ok) fail(ErrorCode::EmptyBoundary, "a component of the free set has no vertex boundary");
  }
  Eigen::SparseMatrix<double> A(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
  if (ldlt.info() != Eigen::Success) fail(ErrorCode::InvalidArgument, "linear system is not positive definite");
  Eigen::VectorXd sol = ldlt.solve(rhs);
  // One step of iterative refinement.
  Eigen::VectorXd res = rhs - A * sol;
  sol += ldlt.solve(res);

  OracleResult out;
  out.method = "sparse LDL^T";
  out.values.assign(g.vertex_count(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < n; ++i) {
    const Vertex x = omega.ids()[i];
    out.values[x] = sol[static_cast<Eigen::Index>(i)];
    for (Vertex y : g.neighbors(x)) {
      if (local[y] < 0) out.values[y] = boundary_values[y];
    }
  }
  double worst = 0.0;
  for (Vertex x : omega) worst = std::max(worst, std::abs(p_flux_at(g, out.values, x, PExponent(2.0))) / g.mu(x));
  out.tolerance = worst;
  return out;
}

/// Counter-based generator: splitmix64 over (seed, stream, counter), so every
/// sample has its own reproducible stream independent of scheduling.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) : key_(mix(seed ^ mix(stream + 0x9e3779b97f4a7c15ULL))) {}

  std::uint64_t next() { return mix(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

namespace detail {

inline double golden_min(const std::function<double(double)>& f, double a, double b, double tol) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace detail

struct BruteforceResult {
  double value = 0.0;
  double spread = 0.0;  // max - min over the starts
  std::vector<double> per_start;
};

/// Condenser capacity by plain coordinate descent on the energy, with
/// golden-section line minimisation, from the mean start and 5 random starts.
inline BruteforceResult bruteforce_condenser(const WeightedGraph& g, const Condenser& c, std::uint64_t seed = 7,
                                             int max_rounds = 20000) {
  require_same_graph(g, c.source);
  require_same_graph(g, c.sink);
  std::vector<char> fixed(g.vertex_count(), 0), in_domain(g.vertex_count(), 1);
  if (c.domain) in_domain = c.domain->mask();
  std::vector<double> base(g.vertex_count(), 0.0);
  for (Vertex x : c.source) {
    fixed[x] = 1;
    base[x] = 1.0;
  }
  for (Vertex x : c.sink) fixed[x] = 1;
  std::vector<Vertex> free;
  for (Vertex v = 0; v < g.vertex_count(); ++v) {
    if (in_domain[v] && !fixed[v]) free.push_back(v);
  }
  if (free.size() > 12) fail(ErrorCode::TooManyFreeVertices, "brute force handles at most 12 free vertices");

  auto energy = [&](const std::vector<double>& u) {
    double e = 0.0;
    for (Vertex x = 0; x < g.vertex_count(); ++x) {
      if (!in_domain[x]) continue;
      const auto row = g.neighbors(x);
      const auto w = g.weights(x);
      for (std::size_t k = 0; k < row.size(); ++k) {
        if (row[k] > x && in_domain[row[k]]) e += w[k] * std::pow(std::abs(u[x] - u[row[k]]), c.p.value());
      }
    }
    return e;
  };
  auto local_energy = [&](const std::vector<double>& u, Vertex x, double t) {
    double e = 0.0;
    const auto row = g.neighbors(x);
    const auto w = g.weights(x);
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (in_domain[row[k]]) e += w[k] * std::pow(std::abs(t - u[row[k]]), c.p.value());
    }
    return e;
  };

  BruteforceResult res;
  CounterRng rng(seed, 0);
  for (int start = 0; start < 6; ++start) {
    std::vector<double> u = base;
    for (Vertex x : free) u[x] = start == 0 ? 0.5 : rng.uniform();
    double prev = energy(u);
    for (int round = 0; round < max_rounds; ++round) {
      double move = 0.0;
      for (Vertex x : free) {
        const double t = detail::golden_min([&](double s) { return local_energy(u, x, s); }, 0.0, 1.0, 1e-12);
        move = std::max(move, std::abs(t - u[x]));
        u[x] = t;
      }
      const double e = energy(u);
      const bool done = move < 1e-11 && prev - e <= 1e-15 * std::max(1.0, e);
      prev = e;
      if (done) break;
    }
    res.per_start.push_back(prev);
  }
  const auto [lo, hi] = std::minmax_element(res.per_start.begin(), res.per_start.end());
  res.value = *lo;
  res.spread = *hi - *lo;
  return res;
}

struct EscapeEstimate {
  std::int64_t radius = 0;
  double probability = 0.0;
  double stderr_estimate = 0.0;
  std::size_t samples = 0;
};

/// Probability that the mu-weighted random walk from x0 reaches graph distance
/// > R from x0 before hitting the complement of omega. With `kill_on_return`
/// a return to x0 also counts as failure, so the estimate is the escape
/// probability cap_2({x0}, B_R ∩ omega) / mu(x0).
inline std::vector<EscapeEstimate> mc_escape_probability(const WeightedGraph& g, const VertexSet& omega, Vertex x0,
                                                         std::size_t samples, const std::vector<std::int64_t>& radii,
                                                         std::uint64_t seed, bool kill_on_return = false) {
  require_same_graph(g, omega);
  if (!omega.contains(x0)) fail(ErrorCode::X0OutsideOmega, "x0 is not in omega");
  if (radii.empty()) return {};
  const std::int64_t rmax = *std::max_element(radii.begin(), radii.end());
  const auto dist = bfs_distances(g, x0, rmax + 1);
  const auto in = omega.mask();
  std::vector<double> total(g.vertex_count());
  for (Vertex x = 0; x < g.vertex_count(); ++x) total[x] = g.mu(x);

  std::vector<EscapeEstimate> out;
  for (auto R : radii) {
    std::size_t hits = 0;
    for (std::size_t s = 0; s < samples; ++s) {
      CounterRng rng(seed ^ static_cast<std::uint64_t>(R) * 0x100000001b3ULL, s);
      Vertex x = x0;
      bool first = true;
      for (;;) {
        if (!first) {
          if (!in[x]) break;
          if (kill_on_return && x == x0) break;
          if (dist[x] == kUnreachable || dist[x] > R) {
            ++hits;
            break;
          }
        }
        first = false;
        const auto row = g.neighbors(x);
        const auto w = g.weights(x);
        if (row.empty()) break;
        double target = rng.uniform() * total[x];
        std::size_t k = 0;
        for (; k + 1 < row.size(); ++k) {
          target -= w[k];
          if (target < 0.0) break;
        }
        x = row[k];
      }
    }
    const double q = static_cast<double>(hits) / static_cast<double>(samples);
    out.push_back({R, q, std::sqrt(q * (1.0 - q) / static_cast<double>(samples)), samples});
  }
  return out;
}

}  // namespace dpt
