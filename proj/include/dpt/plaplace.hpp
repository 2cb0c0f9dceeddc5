#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dpt/error.hpp"
#include "dpt/graph.hpp"

namespace dpt {

/// Exponent p > 1 with the derived quantities the kernels need.
class PExponent {
 public:
  enum class Kernel { Sqrt, Linear, Square, General };

  explicit PExponent(double p) : p_(p) {
    if (!(p > 1.0) || !std::isfinite(p)) fail(ErrorCode::InvalidArgument, "p must be a finite real > 1");
    q_ = p - 1.0;
    inv_q_ = 1.0 / q_;
    if (q_ == 0.5) {
      kernel_ = Kernel::Sqrt;
    } else if (q_ == 1.0) {
      kernel_ = Kernel::Linear;
    } else if (q_ == 2.0) {
      kernel_ = Kernel::Square;
    }
  }

  double value() const noexcept { return p_; }
  /// p - 1
  double q() const noexcept { return q_; }
  /// 1 / (p - 1)
  double inv_q() const noexcept { return inv_q_; }
  Kernel kernel() const noexcept { return kernel_; }

  /// Outside [1.05, 12] the solver still runs but conditioning degrades.
  bool comfortable() const noexcept { return p_ >= 1.05 && p_ <= 12.0; }

  /// |t|^(p-1) for t >= 0.
  double abs_pow_q(double a) const noexcept {
    switch (kernel_) {
      case Kernel::Sqrt: return std::sqrt(a);
      case Kernel::Linear: return a;
      case Kernel::Square: return a * a;
      case Kernel::General: return a == 0.0 ? 0.0 : std::pow(a, q_);
    }
    return 0.0;
  }

  /// sign(t) |t|^(p-1); continuous at 0 for every p > 1.
  double phi(double t) const noexcept {
    const double a = abs_pow_q(std::abs(t));
    return t < 0.0 ? -a : a;
  }

  /// |t|^p
  double abs_pow_p(double t) const noexcept {
    const double a = std::abs(t);
    return abs_pow_q(a) * a;
  }

 private:
  double p_;
  double q_ = 1.0;
  double inv_q_ = 1.0;
  Kernel kernel_ = Kernel::General;
};

/// D_p(u; omega): sum over unordered edges with both endpoints in omega of mu_xy |u(x)-u(y)|^p.
inline double p_energy(const WeightedGraph& g, std::span<const double> u, const VertexSet& omega, const PExponent& p) {
  require_same_graph(g, omega);
  const auto in = omega.mask();
  double e = 0.0;
  for (Vertex x : omega) {
    const auto row = g.neighbors(x);
    const auto w = g.weights(x);
    for (std::size_t k = 0; k < row.size(); ++k) {
      const Vertex y = row[k];
      if (y > x && in[y]) e += w[k] * p.abs_pow_p(u[x] - u[y]);
    }
  }
  return e;
}

/// D_p(u) over every edge of the graph.
inline double p_energy(const WeightedGraph& g, std::span<const double> u, const PExponent& p) {
  double e = 0.0;
  for (Vertex x = 0; x < g.vertex_count(); ++x) {
    const auto row = g.neighbors(x);
    const auto w = g.weights(x);
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (row[k] > x) e += w[k] * p.abs_pow_p(u[x] - u[row[k]]);
    }
  }
  return e;
}

/// Sum over neighbors of mu_xy sign(u(y)-u(x)) |u(y)-u(x)|^(p-1), i.e. mu(x) * Delta_p u(x).
inline double p_flux_at(const WeightedGraph& g, std::span<const double> u, Vertex x, const PExponent& p) {
  const auto row = g.neighbors(x);
  const auto w = g.weights(x);
  const double ux = u[x];
  double s = 0.0;
  for (std::size_t k = 0; k < row.size(); ++k) s += w[k] * p.phi(u[row[k]] - ux);
  return s;
}

/// Delta_p u(x) normalised by the canonical measure.
inline double p_laplacian_at(const WeightedGraph& g, std::span<const double> u, Vertex x, const PExponent& p) {
  require_vertex(g, x);
  const double m = g.mu(x);
  if (m == 0.0) return 0.0;
  return p_flux_at(g, u, x, p) / m;
}

enum class SweepOrder {
  Sequential,  ///< fixed id order
  Colored,     ///< greedy colouring; vertices of one colour updated in parallel
};

enum class SolverMethod {
  Auto,         ///< Gauss-Seidel for p >= 2 up to `auto_threshold` free vertices, Newton otherwise
  GaussSeidel,  ///< nonlinear Gauss-Seidel with exact local solves
  Newton,       ///< damped Newton, Jacobi-PCG inner solves
};

struct SolverOptions {
  double tol = 1e-10;                ///< bound on max |Delta_p u| over the free set
  double energy_rtol = 1e-12;        ///< relative energy change per iteration
  std::size_t max_sweeps = 0;        ///< 0 selects 200 * |free set| (Gauss-Seidel) or 500 (Newton)
  int scalar_max_iter = 100;
  double scalar_fraction = 0.05;     ///< local solves aim at this fraction of tol
  SolverMethod method = SolverMethod::Auto;
  std::size_t auto_threshold = 1000;
  SweepOrder order = SweepOrder::Sequential;
  int threads = 1;
  bool record_energy = false;        ///< keep the per-iteration energy trace
  std::size_t stall_window = 0;      ///< stop after this many iterations without residual progress (0: never)
};

struct PotentialSolution {
  std::vector<double> u;             ///< full length; NaN outside closure(free_set)
  VertexSet free_set;
  double max_residual = 0.0;
  double energy_closure = 0.0;       ///< D_p(u; closure(free_set))
  std::size_t sweeps = 0;            ///< Gauss-Seidel sweeps or Newton steps
  std::size_t linear_iterations = 0; ///< PCG iterations (Newton only)
  SolverMethod method = SolverMethod::GaussSeidel;
  bool converged = false;
  bool conditioning_flag = false;    ///< p outside the comfortable range
  std::vector<double> energy_trace;  ///< per iteration, when requested
};

inline std::string_view to_string(SolverMethod m) {
  switch (m) {
    case SolverMethod::Auto: return "auto";
    case SolverMethod::GaussSeidel: return "gauss-seidel";
    case SolverMethod::Newton: return "newton";
  }
  return "?";
}

namespace detail {

/// Solve sum_k w_k phi(v_k - t) = target for t. The left side is continuous
/// and strictly decreasing in t, so the root is unique inside [min v, max v].
/// Newton steps are taken while they stay inside the shrinking bracket,
/// bisection otherwise.
inline double local_root(std::span<const Vertex> nbrs, std::span<const double> w, std::span<const double> u,
                         double start, double flux_tol, int max_iter, const PExponent& p) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (Vertex y : nbrs) {
    lo = std::min(lo, u[y]);
    hi = std::max(hi, u[y]);
  }
  if (!(hi > lo)) return lo;

  if (p.kernel() == PExponent::Kernel::Linear) {
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < nbrs.size(); ++k) {
      num += w[k] * u[nbrs[k]];
      den += w[k];
    }
    return std::clamp(num / den, lo, hi);
  }

  const double q = p.q();
  double t = std::clamp(start, lo, hi);
  for (int it = 0; it < max_iter; ++it) {
    double f = 0.0, df = 0.0;
    bool singular = false;
    for (std::size_t k = 0; k < nbrs.size(); ++k) {
      const double d = u[nbrs[k]] - t;
      const double a = std::abs(d);
      const double pa = p.abs_pow_q(a);
      f += d < 0.0 ? -w[k] * pa : w[k] * pa;
      if (a > 0.0) {
        df += w[k] * q * pa / a;
      } else if (q < 1.0) {
        singular = true;
      }
    }
    if (std::abs(f) <= flux_tol) return t;
    if (f > 0.0) {
      lo = t;
    } else {
      hi = t;
    }
    if (!(hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi)))) return t;
    double next = 0.5 * (lo + hi);
    if (!singular && df > 0.0) {
      const double newton = t + f / df;
      if (newton > lo && newton < hi) next = newton;
    }
    if (next == t) return t;
    t = next;
  }
  return t;
}

inline std::vector<std::vector<Vertex>> greedy_colouring(const WeightedGraph& g, std::span<const Vertex> free,
                                                         const std::vector<std::uint8_t>& state) {
  std::vector<int> colour(g.vertex_count(), -1);
  std::vector<std::vector<Vertex>> classes;
  std::vector<char> used;
  for (Vertex x : free) {
    used.assign(classes.size() + 1, 0);
    for (Vertex y : g.neighbors(x)) {
      if (state[y] == 1 && colour[y] >= 0) used[static_cast<std::size_t>(colour[y])] = 1;
    }
    std::size_t c = 0;
    while (used[c]) ++c;
    if (c == classes.size()) classes.emplace_back();
    classes[c].push_back(x);
    colour[x] = static_cast<int>(c);
  }
  return classes;
}

}  // namespace detail

/// Solver for Delta_p u = 0 on a finite free set with Dirichlet data on its
/// outer vertex boundary.
///
/// `boundary_values` is a full-length field; only entries on the vertex
/// boundary of the free set are read. A non-empty `warm_start` supplies the
/// initial iterate on the free set, otherwise the free set starts at the mean
/// of the boundary data.
class DirichletSolver {
 public:
  DirichletSolver(const WeightedGraph& g, const VertexSet& free_set, const PExponent& p, SolverOptions opts = {})
      : g_(g), free_(free_set), p_(p), opts_(opts) {
    require_same_graph(g, free_set);
    if (free_set.empty()) fail(ErrorCode::InvalidArgument, "free set is empty");
    state_.assign(g.vertex_count(), 0);
    for (Vertex x : free_set) state_[x] = 1;
    for (Vertex x : free_set) {
      for (Vertex y : g.neighbors(x)) {
        if (state_[y] == 0) state_[y] = 2;
      }
    }
    for (Vertex v = 0; v < g.vertex_count(); ++v) {
      if (state_[v] == 2) boundary_.push_back(v);
    }
    check_components();
    method_ = opts_.method;
    if (method_ == SolverMethod::Auto) {
      // Coordinate sweeps stall for p < 2 once gradients get small (the local
      // problems become nearly singular), so Newton takes over there.
      method_ = (free_set.size() > opts_.auto_threshold || p.value() < 2.0) ? SolverMethod::Newton
                                                                             : SolverMethod::GaussSeidel;
    }
    if (method_ == SolverMethod::GaussSeidel && opts_.order == SweepOrder::Colored) {
      colours_ = detail::greedy_colouring(g, free_set.ids(), state_);
    }
  }

  const std::vector<Vertex>& boundary() const noexcept { return boundary_; }
  SolverMethod method() const noexcept { return method_; }

  PotentialSolution solve(std::span<const double> boundary_values, std::span<const double> warm_start = {}) const {
    if (boundary_values.size() != g_.vertex_count()) {
      fail(ErrorCode::InvalidArgument, "boundary field must have one entry per vertex");
    }
    PotentialSolution sol;
    sol.free_set = free_;
    sol.method = method_;
    sol.conditioning_flag = !p_.comfortable();
    sol.u.assign(g_.vertex_count(), std::numeric_limits<double>::quiet_NaN());
    double mean = 0.0;
    for (Vertex b : boundary_) {
      if (!std::isfinite(boundary_values[b])) {
        fail(ErrorCode::NonFinite, "boundary value at vertex " + std::to_string(b) + " is not finite");
      }
      sol.u[b] = boundary_values[b];
      mean += boundary_values[b];
    }
    mean /= static_cast<double>(boundary_.size());
    const bool warm = !warm_start.empty();
    if (warm && warm_start.size() != g_.vertex_count()) {
      fail(ErrorCode::InvalidArgument, "warm start must have one entry per vertex");
    }
    for (Vertex x : free_) sol.u[x] = (warm && std::isfinite(warm_start[x])) ? warm_start[x] : mean;

    if (method_ == SolverMethod::Newton) {
      run_newton(sol);
    } else {
      run_gauss_seidel(sol);
    }
    sol.energy_closure = free_energy(sol.u) + boundary_energy(sol.u);
    return sol;
  }

  /// max |Delta_p u| over the free set. For p < 2, phi has infinite slope at
  /// 0, so differences within a few ulps of the endpoint values count as 0:
  /// otherwise rounding alone keeps the residual near eps^(p-1).
  double max_residual(std::span<const double> u) const {
    double r = 0.0;
    for (Vertex x : free_) r = std::max(r, std::abs(resolved_flux(u, x)) / g_.mu(x));
    return r;
  }

 private:
  double resolved_flux(std::span<const double> u, Vertex x) const {
    if (p_.value() >= 2.0) return p_flux_at(g_, u, x, p_);
    const auto row = g_.neighbors(x);
    const auto w = g_.weights(x);
    const double ux = u[x];
    double s = 0.0;
    for (std::size_t k = 0; k < row.size(); ++k) {
      const double d = u[row[k]] - ux;
      if (std::abs(d) > kResolution * std::max(std::abs(ux), std::abs(u[row[k]]))) s += w[k] * p_.phi(d);
    }
    return s;
  }

  static constexpr double kResolution = 4.0 * std::numeric_limits<double>::epsilon();

  void check_components() const {
    std::vector<char> seen(g_.vertex_count(), 0);
    std::vector<Vertex> stack;
    for (Vertex s : free_) {
      if (seen[s]) continue;
      bool touches = false;
      stack.assign(1, s);
      seen[s] = 1;
      while (!stack.empty()) {
        const Vertex x = stack.back();
        stack.pop_back();
        for (Vertex y : g_.neighbors(x)) {
          if (state_[y] == 2) touches = true;
          if (state_[y] == 1 && !seen[y]) {
            seen[y] = 1;
            stack.push_back(y);
          }
        }
      }
      if (!touches) {
        fail(ErrorCode::EmptyBoundary, "component of the free set containing vertex " + std::to_string(s) +
                                           " has no vertex boundary");
      }
    }
  }

  /// Shared stopping rule. Returns true once converged.
  struct Monitor {
    double energy = 0.0;
    double best = std::numeric_limits<double>::infinity();
    std::size_t last_progress = 0;
    bool stalled = false;
  };

  bool accept(PotentialSolution& sol, Monitor& mon, double next_energy) const {
    if (opts_.record_energy) sol.energy_trace.push_back(next_energy);
    const double rel = std::abs(mon.energy - next_energy) / std::max(next_energy, std::numeric_limits<double>::min());
    mon.energy = next_energy;
    sol.max_residual = max_residual(sol.u);
    if (sol.max_residual <= opts_.tol && (rel <= opts_.energy_rtol || next_energy == 0.0)) return true;
    if (sol.max_residual < 0.99 * mon.best) {
      mon.best = sol.max_residual;
      mon.last_progress = sol.sweeps;
    } else if (opts_.stall_window && sol.sweeps - mon.last_progress > opts_.stall_window) {
      mon.stalled = true;
    }
    return false;
  }

  void run_gauss_seidel(PotentialSolution& sol) const {
    const std::size_t max_sweeps = opts_.max_sweeps ? opts_.max_sweeps : 200 * free_.size();
    const double target = opts_.scalar_fraction * opts_.tol;
    Monitor mon;
    mon.energy = free_energy(sol.u);
    if (opts_.record_energy) sol.energy_trace.push_back(mon.energy);
    sol.max_residual = max_residual(sol.u);
    sol.converged = sol.max_residual <= opts_.tol;
    while (!sol.converged && !mon.stalled && sol.sweeps < max_sweeps) {
      sweep(sol.u, target);
      ++sol.sweeps;
      sol.converged = accept(sol, mon, free_energy(sol.u));
    }
  }

  void update(std::vector<double>& u, Vertex x, double target) const {
    u[x] = detail::local_root(g_.neighbors(x), g_.weights(x), u, u[x], target * g_.mu(x), opts_.scalar_max_iter, p_);
  }

  void sweep(std::vector<double>& u, double target) const {
    if (opts_.order == SweepOrder::Sequential) {
      for (Vertex x : free_) update(u, x, target);
      return;
    }
    for (const auto& cls : colours_) {
      const auto n = static_cast<std::int64_t>(cls.size());
#if defined(_OPENMP)
#pragma omp parallel for num_threads(opts_.threads) schedule(static)
#endif
      for (std::int64_t i = 0; i < n; ++i) update(u, cls[static_cast<std::size_t>(i)], target);
    }
  }

  // Newton on the convex energy E(u) = sum_e mu_e |grad_e u|^p restricted to
  // the free set. The Jacobian of the flux F_x = sum_y mu_xy phi(u_y - u_x) is
  // minus a weighted Laplacian with edge weights (p-1) mu_xy |grad|^(p-2); the
  // weights are evaluated with |grad| clamped away from 0 so the system stays
  // definite. Steps are damped by a line search on the directional derivative
  // of E, which keeps every iterate energy-decreasing.
  void run_newton(PotentialSolution& sol) const {
    const std::size_t n = free_.size();
    const std::size_t max_steps = opts_.max_sweeps ? opts_.max_sweeps : 500;
    std::vector<std::int64_t> local(g_.vertex_count(), -1);
    for (std::size_t i = 0; i < n; ++i) local[free_.ids()[i]] = static_cast<std::int64_t>(i);

    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (Vertex b : boundary_) {
      lo = std::min(lo, sol.u[b]);
      hi = std::max(hi, sol.u[b]);
    }
    const double range = hi > lo ? hi - lo : 1.0;
    const double clamp = (p_.q() < 1.0 ? 1e-12 : 1e-6) * range;

    std::vector<double> coef(g_.vertex_count() == 0 ? 0 : nnz(), 0.0);
    std::vector<double> diag(n), flux(n), dx(n), r(n), z(n), dir(n), adir(n);
    std::vector<double> trial = sol.u;

    Monitor mon;
    mon.energy = free_energy(sol.u);
    if (opts_.record_energy) sol.energy_trace.push_back(mon.energy);
    sol.max_residual = max_residual(sol.u);
    sol.converged = sol.max_residual <= opts_.tol;
    double prev_norm = -1.0;

    while (!sol.converged && !mon.stalled && sol.sweeps < max_steps) {
      // Assemble flux and Jacobian weights.
      double fnorm2 = 0.0;
      std::size_t e = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const Vertex x = free_.ids()[i];
        const auto row = g_.neighbors(x);
        const auto w = g_.weights(x);
        double f = 0.0, dsum = 0.0;
        for (std::size_t k = 0; k < row.size(); ++k, ++e) {
          const double d = sol.u[row[k]] - sol.u[x];
          const double a = std::abs(d);
          const double pa = p_.abs_pow_q(a);
          const bool resolved = p_.q() >= 1.0 || a > kResolution * std::max(std::abs(sol.u[x]), std::abs(sol.u[row[k]]));
          if (resolved) f += d < 0.0 ? -w[k] * pa : w[k] * pa;
          const double ac = std::max(a, clamp);
          const double c = w[k] * p_.q() * (a >= clamp ? pa / a : p_.abs_pow_q(ac) / ac);
          coef[e] = c;
          dsum += c;
        }
        flux[i] = f;
        diag[i] = dsum;
        fnorm2 += f * f;
      }
      const double fnorm = std::sqrt(fnorm2);
      double forcing = 1e-2;
      if (prev_norm > 0.0) forcing = std::clamp(0.1 * fnorm / prev_norm, 1e-10, 1e-2);
      prev_norm = fnorm;

      sol.linear_iterations += pcg(local, coef, diag, flux, dx, r, z, dir, adir, forcing);

      const double step = line_search(sol.u, trial, dx);
      for (std::size_t i = 0; i < n; ++i) sol.u[free_.ids()[i]] += step * dx[i];
      ++sol.sweeps;
      sol.converged = accept(sol, mon, free_energy(sol.u));
    }
  }

  std::size_t nnz() const {
    std::size_t s = 0;
    for (Vertex x : free_) s += g_.degree(x);
    return s;
  }

  /// y = J v over the free set (fixed neighbours contribute only to the diagonal).
  void apply(const std::vector<std::int64_t>& local, const std::vector<double>& coef, const std::vector<double>& diag,
             const std::vector<double>& v, std::vector<double>& y) const {
    std::size_t e = 0;
    const std::size_t n = free_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = g_.neighbors(free_.ids()[i]);
      double s = diag[i] * v[i];
      for (std::size_t k = 0; k < row.size(); ++k, ++e) {
        const std::int64_t j = local[row[k]];
        if (j >= 0) s -= coef[e] * v[static_cast<std::size_t>(j)];
      }
      y[i] = s;
    }
  }

  std::size_t pcg(const std::vector<std::int64_t>& local, const std::vector<double>& coef,
                  const std::vector<double>& diag, const std::vector<double>& b, std::vector<double>& x,
                  std::vector<double>& r, std::vector<double>& z, std::vector<double>& d, std::vector<double>& ad,
                  double rtol) const {
    const std::size_t n = b.size();
    double bnorm2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = 0.0;
      r[i] = b[i];
      z[i] = r[i] / diag[i];
      d[i] = z[i];
      bnorm2 += b[i] * b[i];
    }
    if (bnorm2 == 0.0) return 0;
    double rz = 0.0;
    for (std::size_t i = 0; i < n; ++i) rz += r[i] * z[i];
    const double stop2 = rtol * rtol * bnorm2;
    const std::size_t max_iter = std::max<std::size_t>(100, 20 * static_cast<std::size_t>(std::cbrt(double(n))) * 20);
    std::size_t it = 0;
    for (; it < max_iter; ++it) {
      apply(local, coef, diag, d, ad);
      double dad = 0.0;
      for (std::size_t i = 0; i < n; ++i) dad += d[i] * ad[i];
      if (!(dad > 0.0)) break;
      const double alpha = rz / dad;
      double rr = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        x[i] += alpha * d[i];
        r[i] -= alpha * ad[i];
        rr += r[i] * r[i];
      }
      if (rr <= stop2) {
        ++it;
        break;
      }
      double rz_next = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        z[i] = r[i] / diag[i];
        rz_next += r[i] * z[i];
      }
      const double beta = rz_next / rz;
      rz = rz_next;
      for (std::size_t i = 0; i < n; ++i) d[i] = z[i] + beta * d[i];
    }
    return it;
  }

  /// Derivative of s -> E(u + s dx) up to the factor p: -sum_x F_x(u + s dx) dx_x.
  double slope(std::span<const double> u, std::vector<double>& trial, const std::vector<double>& dx, double s) const {
    const std::size_t n = free_.size();
    for (std::size_t i = 0; i < n; ++i) trial[free_.ids()[i]] = u[free_.ids()[i]] + s * dx[i];
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) d -= p_flux_at(g_, trial, free_.ids()[i], p_) * dx[i];
    return d;
  }

  double line_search(std::span<const double> u, std::vector<double>& trial, const std::vector<double>& dx) const {
    const double d0 = slope(u, trial, dx, 0.0);
    if (!(d0 < 0.0)) return 0.0;
    const double d1 = slope(u, trial, dx, 1.0);
    if (d1 <= 0.0) return 1.0;
    // The slope is increasing along the line (convexity); regula falsi with
    // bisection fallback until it drops below 10% of its initial magnitude.
    double lo = 0.0, hi = 1.0, flo = d0, fhi = d1, s = 1.0;
    for (int it = 0; it < 40; ++it) {
      s = (flo * hi - fhi * lo) / (flo - fhi);
      if (!(s > lo && s < hi)) s = 0.5 * (lo + hi);
      const double fs = slope(u, trial, dx, s);
      if (std::abs(fs) <= 0.1 * std::abs(d0)) break;
      if (fs < 0.0) {
        lo = s;
        flo = fs;
      } else {
        hi = s;
        fhi = fs;
      }
    }
    return s;
  }

  /// Energy of edges with at least one free endpoint.
  double free_energy(std::span<const double> u) const {
    double e = 0.0;
    for (Vertex x : free_) {
      const auto row = g_.neighbors(x);
      const auto w = g_.weights(x);
      for (std::size_t k = 0; k < row.size(); ++k) {
        const Vertex y = row[k];
        if (state_[y] == 2 || y > x) e += w[k] * p_.abs_pow_p(u[x] - u[y]);
      }
    }
    return e;
  }

  /// Energy of edges joining two boundary vertices (constant during a solve).
  double boundary_energy(std::span<const double> u) const {
    double e = 0.0;
    for (Vertex b : boundary_) {
      const auto row = g_.neighbors(b);
      const auto w = g_.weights(b);
      for (std::size_t k = 0; k < row.size(); ++k) {
        if (row[k] > b && state_[row[k]] == 2) e += w[k] * p_.abs_pow_p(u[b] - u[row[k]]);
      }
    }
    return e;
  }

  const WeightedGraph& g_;
  VertexSet free_;
  PExponent p_;
  SolverOptions opts_;
  SolverMethod method_ = SolverMethod::GaussSeidel;
  std::vector<std::uint8_t> state_;  // 0 outside, 1 free, 2 boundary
  std::vector<Vertex> boundary_;
  std::vector<std::vector<Vertex>> colours_;
};

inline PotentialSolution solve_dirichlet(const WeightedGraph& g, const VertexSet& free_set,
                                         std::span<const double> boundary_values, const PExponent& p,
                                         const SolverOptions& opts = {}, std::span<const double> warm_start = {}) {
  return DirichletSolver(g, free_set, p, opts).solve(boundary_values, warm_start);
}

/// Per-vertex Delta_p u over a set (0 where the measure vanishes).
inline std::vector<double> residuals(const WeightedGraph& g, std::span<const double> u, const VertexSet& set,
                                     const PExponent& p) {
  std::vector<double> r;
  r.reserve(set.size());
  for (Vertex x : set) r.push_back(p_laplacian_at(g, u, x, p));
  return r;
}

struct GreenCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double abs_gap = 0.0;
};

/// Both sides of the discrete Green formula on a finite set omega:
///   sum_{x in omega} Delta_p f(x) g(x) mu(x)
///     = -1/2 sum_{x,y in omega} phi(grad f) grad g mu_xy + sum_{x in omega, y in boundary} phi(grad f) g(x) mu_xy
inline GreenCheck greens_identity_check(const WeightedGraph& g, const VertexSet& omega, std::span<const double> f,
                                        std::span<const double> h, const PExponent& p) {
  require_same_graph(g, omega);
  const auto in = omega.mask();
  GreenCheck c;
  double interior = 0.0, flux = 0.0;
  for (Vertex x : omega) {
    c.lhs += p_laplacian_at(g, f, x, p) * h[x] * g.mu(x);
    const auto row = g.neighbors(x);
    const auto w = g.weights(x);
    for (std::size_t k = 0; k < row.size(); ++k) {
      const Vertex y = row[k];
      const double grad = p.phi(f[y] - f[x]);
      if (in[y]) {
        interior += grad * (h[y] - h[x]) * w[k];
      } else {
        flux += grad * h[x] * w[k];
      }
    }
  }
  c.rhs = -0.5 * interior + flux;
  c.abs_gap = std::abs(c.lhs - c.rhs);
  return c;
}

/// CSV rows `vertex,u,residual` over the closure of the free set.
inline void write_solution_csv(std::ostream& os, const WeightedGraph& g, const PotentialSolution& sol,
                               const PExponent& p) {
  os << "vertex,u,residual\n";
  os.precision(17);
  for (Vertex v = 0; v < g.vertex_count(); ++v) {
    if (!std::isfinite(sol.u[v])) continue;
    const double r = sol.free_set.contains(v) ? p_laplacian_at(g, sol.u, v, p) : 0.0;
    os << v << ',' << sol.u[v] << ',' << r << '\n';
  }
}

}  // namespace dpt
