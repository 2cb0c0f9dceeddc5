#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "dpt/error.hpp"
#include "dpt/graph.hpp"

namespace dpt {

using Coord = std::vector<std::int64_t>;

/// L-infinity box {-R..R}^d of Z^d with constant nearest-neighbour weight.
///
/// Ids enumerate the box with the first coordinate varying fastest.
struct LatticeWindow {
  int dim = 1;
  std::int64_t radius = 1;
  double weight = 0.5;
  std::uint64_t graph_id = 0;

  std::int64_t side() const noexcept { return 2 * radius + 1; }

  std::size_t vertex_count() const noexcept {
    std::size_t n = 1;
    for (int i = 0; i < dim; ++i) n *= static_cast<std::size_t>(side());
    return n;
  }

  bool inside(const Coord& c) const {
    if (static_cast<int>(c.size()) != dim) return false;
    for (auto v : c) {
      if (v < -radius || v > radius) return false;
    }
    return true;
  }

  Vertex id(const Coord& c) const {
    if (!inside(c)) fail(ErrorCode::IdOutOfRange, "coordinate outside lattice window");
    std::size_t id = 0;
    for (int i = dim - 1; i >= 0; --i) id = id * static_cast<std::size_t>(side()) + static_cast<std::size_t>(c[i] + radius);
    return static_cast<Vertex>(id);
  }

  Coord coord(Vertex v) const {
    Coord c(static_cast<std::size_t>(dim));
    std::size_t rest = v;
    for (int i = 0; i < dim; ++i) {
      c[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(rest % static_cast<std::size_t>(side())) - radius;
      rest /= static_cast<std::size_t>(side());
    }
    return c;
  }

  Vertex origin() const { return id(Coord(static_cast<std::size_t>(dim), 0)); }

  /// Select window vertices whose coordinates satisfy `pred`.
  template <class Pred>
  VertexSet select(const WeightedGraph& g, Pred&& pred) const {
    if (g.id() != graph_id) fail(ErrorCode::GraphMismatch, "window does not describe this graph");
    std::vector<Vertex> ids;
    const std::size_t n = vertex_count();
    for (std::size_t v = 0; v < n; ++v) {
      if (pred(coord(static_cast<Vertex>(v)))) ids.push_back(static_cast<Vertex>(v));
    }
    return VertexSet(g, std::move(ids));
  }
};

struct Lattice {
  WeightedGraph graph;
  LatticeWindow window;
};

inline constexpr std::size_t kDefaultVertexBudget = 20'000'000;

/// Z^d truncated to the box of radius R; w <= 0 selects the standard 1/(2d).
inline Lattice lattice_box(int d, std::int64_t R, double w = 0.0, std::size_t vertex_budget = kDefaultVertexBudget) {
  if (d < 1) fail(ErrorCode::InvalidArgument, "dimension must be >= 1");
  if (R < 1) fail(ErrorCode::InvalidArgument, "window radius must be >= 1");
  if (w <= 0.0) w = 1.0 / (2.0 * d);
  LatticeWindow win{d, R, w, 0};
  double count = std::pow(static_cast<double>(win.side()), d);
  if (count > static_cast<double>(vertex_budget)) {
    fail(ErrorCode::SizeOverflow, "lattice box of dimension " + std::to_string(d) + " and radius " +
                                      std::to_string(R) + " exceeds the vertex budget");
  }
  const std::size_t n = win.vertex_count();
  std::vector<Edge> edges;
  edges.reserve(n * static_cast<std::size_t>(d));
  std::vector<std::size_t> stride(static_cast<std::size_t>(d), 1);
  for (int i = 1; i < d; ++i) stride[static_cast<std::size_t>(i)] = stride[static_cast<std::size_t>(i - 1)] * static_cast<std::size_t>(win.side());
  for (std::size_t v = 0; v < n; ++v) {
    std::size_t rest = v;
    for (int i = 0; i < d; ++i) {
      const auto digit = static_cast<std::int64_t>(rest % static_cast<std::size_t>(win.side()));
      rest /= static_cast<std::size_t>(win.side());
      if (digit + 1 < win.side()) {
        edges.push_back({static_cast<Vertex>(v), static_cast<Vertex>(v + stride[static_cast<std::size_t>(i)]), w});
      }
    }
  }
  Lattice lat{WeightedGraph::build(n, edges), win};
  lat.window.graph_id = lat.graph.id();
  return lat;
}

inline std::int64_t l1_norm(const Coord& c) {
  std::int64_t s = 0;
  for (auto v : c) s += v < 0 ? -v : v;
  return s;
}

/// Squared Euclidean norm of the transverse coordinates x' = (x_2, ..., x_d).
inline std::int64_t transverse_norm2(const Coord& c) {
  std::int64_t s = 0;
  for (std::size_t i = 1; i < c.size(); ++i) s += c[i] * c[i];
  return s;
}

/// Thorn radius profile f(n), n >= 0. Rational profiles compare exactly in
/// integers; power profiles compare ||x'|| <= f(n) in floating point.
struct ThornProfile {
  enum class Kind { Constant, Linear, Power };
  Kind kind = Kind::Constant;
  std::int64_t num = 0;  // Constant: value num/den; Linear: slope num/den
  std::int64_t den = 1;
  double coeff = 1.0;    // Power: coeff * n^alpha
  double alpha = 0.5;

  static ThornProfile constant(std::int64_t num, std::int64_t den = 1) { return {Kind::Constant, num, den, 1.0, 0.0}; }
  static ThornProfile linear(std::int64_t num, std::int64_t den = 1) { return {Kind::Linear, num, den, 1.0, 1.0}; }
  static ThornProfile power(double alpha, double coeff = 1.0) { return {Kind::Power, 0, 1, coeff, alpha}; }

  double operator()(std::int64_t n) const {
    switch (kind) {
      case Kind::Constant: return static_cast<double>(num) / static_cast<double>(den);
      case Kind::Linear: return static_cast<double>(num) * static_cast<double>(n) / static_cast<double>(den);
      case Kind::Power:
        if (n == 0) return alpha == 0.0 ? coeff : 0.0;
        return alpha == 0.5 ? coeff * std::sqrt(static_cast<double>(n)) : coeff * std::pow(static_cast<double>(n), alpha);
    }
    return 0.0;
  }

  /// ||x'||^2 <= f(n)^2
  bool admits(std::int64_t norm2, std::int64_t n) const {
    switch (kind) {
      case Kind::Constant: return norm2 * den * den <= num * num;
      case Kind::Linear: return norm2 * den * den <= num * num * n * n;
      case Kind::Power: return std::sqrt(static_cast<double>(norm2)) <= (*this)(n);
    }
    return false;
  }

  void validate(std::int64_t upto) const {
    if (den <= 0) fail(ErrorCode::InvalidArgument, "profile denominator must be positive");
    double prev = -1.0;
    for (std::int64_t n = 0; n <= upto; ++n) {
      const double v = (*this)(n);
      if (!(v >= 0.0) || v < prev) fail(ErrorCode::InvalidArgument, "thorn profile must be nonnegative and nondecreasing");
      prev = v;
    }
  }
};

/// {(x_1, x') : x_1 >= 0, ||x'|| <= f(x_1)} within the window.
inline VertexSet thorn_set(const WeightedGraph& g, const LatticeWindow& win, const ThornProfile& f) {
  f.validate(win.radius);
  return win.select(g, [&](const Coord& c) { return c[0] >= 0 && f.admits(transverse_norm2(c), c[0]); });
}

/// {(x_1, x') : 0 <= x_1 <= h, ||x'|| <= r}
inline VertexSet cylinder_set(const WeightedGraph& g, const LatticeWindow& win, std::int64_t h, std::int64_t r) {
  if (h < 0 || r < 0 || r > win.radius) fail(ErrorCode::InvalidArgument, "cylinder needs 0 <= h and 0 <= r <= R");
  return win.select(g, [&](const Coord& c) { return c[0] >= 0 && c[0] <= h && transverse_norm2(c) <= r * r; });
}

/// Z x {0}^(d-1) within the window.
inline VertexSet axis_set(const WeightedGraph& g, const LatticeWindow& win) {
  return win.select(g, [](const Coord& c) { return transverse_norm2(c) == 0; });
}

}  // namespace dpt
