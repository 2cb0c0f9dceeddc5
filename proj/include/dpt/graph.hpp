#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dpt/error.hpp"

namespace dpt {

using Vertex = std::uint32_t;

struct Edge {
  Vertex x = 0;
  Vertex y = 0;
  double weight = 0.0;
};

namespace detail {
inline std::uint64_t next_graph_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}
}  // namespace detail

/// Symmetric, positively weighted, locally finite graph in CSR form.
///
/// Both orientations of every undirected edge are stored; neighbor lists are
/// sorted by id. The canonical vertex measure mu(x) = sum_y mu_xy is cached at
/// build time. An optional measure override m(x) can be attached but is only
/// reported: the p-Laplacian and all sigma accounting use the canonical measure.
class WeightedGraph {
 public:
  WeightedGraph() = default;

  static WeightedGraph build(std::size_t vertex_count, std::span<const Edge> edges) {
    if (vertex_count > std::numeric_limits<Vertex>::max()) {
      fail(ErrorCode::SizeOverflow, "vertex count exceeds 32-bit id space");
    }
    WeightedGraph g;
    g.id_ = detail::next_graph_id();
    g.offsets_.assign(vertex_count + 1, 0);
    for (const Edge& e : edges) {
      if (e.x >= vertex_count || e.y >= vertex_count) {
        fail(ErrorCode::IdOutOfRange, "edge (" + std::to_string(e.x) + "," + std::to_string(e.y) +
                                          ") outside 0.." + std::to_string(vertex_count));
      }
      if (e.x == e.y) fail(ErrorCode::SelfLoop, "self-loop at vertex " + std::to_string(e.x));
      if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
        fail(ErrorCode::NonPositiveWeight,
             "edge (" + std::to_string(e.x) + "," + std::to_string(e.y) + ") weight must be positive and finite");
      }
      ++g.offsets_[e.x + 1];
      ++g.offsets_[e.y + 1];
    }
    std::partial_sum(g.offsets_.begin(), g.offsets_.end(), g.offsets_.begin());
    g.neighbors_.resize(g.offsets_.back());
    g.weights_.resize(g.offsets_.back());
    std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
    for (const Edge& e : edges) {
      g.neighbors_[cursor[e.x]] = e.y;
      g.weights_[cursor[e.x]++] = e.weight;
      g.neighbors_[cursor[e.y]] = e.x;
      g.weights_[cursor[e.y]++] = e.weight;
    }
    g.sort_rows();
    g.measure_.resize(vertex_count);
    for (Vertex x = 0; x < vertex_count; ++x) {
      const auto row = g.neighbors(x);
      for (std::size_t k = 1; k < row.size(); ++k) {
        if (row[k] == row[k - 1]) {
          fail(ErrorCode::DuplicateEdge,
               "duplicate edge (" + std::to_string(x) + "," + std::to_string(row[k]) + ")");
        }
      }
      g.measure_[x] = g.canonical_measure(x);
    }
    return g;
  }

  std::uint64_t id() const noexcept { return id_; }
  std::size_t vertex_count() const noexcept { return measure_.size(); }
  std::size_t edge_count() const noexcept { return neighbors_.size() / 2; }

  std::span<const Vertex> neighbors(Vertex x) const {
    return {neighbors_.data() + offsets_[x], offsets_[x + 1] - offsets_[x]};
  }
  std::span<const double> weights(Vertex x) const {
    return {weights_.data() + offsets_[x], offsets_[x + 1] - offsets_[x]};
  }
  std::size_t degree(Vertex x) const { return offsets_[x + 1] - offsets_[x]; }

  /// Cached canonical measure mu(x).
  double mu(Vertex x) const { return measure_[x]; }
  std::span<const double> mu() const { return measure_; }

  /// Sum of incident weights recomputed from the adjacency.
  double canonical_measure(Vertex x) const {
    double s = 0.0;
    for (double w : weights(x)) s += w;
    return s;
  }

  /// m(x): the override if one was attached, else the canonical measure.
  double vertex_measure(Vertex x) const { return override_.empty() ? measure_[x] : override_[x]; }
  bool has_measure_override() const noexcept { return !override_.empty(); }

  WeightedGraph with_vertex_measure(std::vector<double> m) const {
    if (m.size() != vertex_count()) fail(ErrorCode::InvalidArgument, "measure override has wrong length");
    for (double v : m) {
      if (!(v > 0.0) || !std::isfinite(v)) fail(ErrorCode::InvalidArgument, "measure override must be positive");
    }
    WeightedGraph g = *this;
    g.override_ = std::move(m);
    return g;
  }

  std::optional<double> weight(Vertex x, Vertex y) const {
    const auto row = neighbors(x);
    const auto it = std::lower_bound(row.begin(), row.end(), y);
    if (it == row.end() || *it != y) return std::nullopt;
    return weights(x)[static_cast<std::size_t>(it - row.begin())];
  }

  /// Undirected edge list with x < y, in CSR order.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count());
    for (Vertex x = 0; x < vertex_count(); ++x) {
      const auto row = neighbors(x);
      const auto w = weights(x);
      for (std::size_t k = 0; k < row.size(); ++k) {
        if (x < row[k]) out.push_back({x, row[k], w[k]});
      }
    }
    return out;
  }

  /// Same topology with every weight multiplied by c > 0. Gets a new identity.
  WeightedGraph scaled(double c) const {
    if (!(c > 0.0)) fail(ErrorCode::NonPositiveWeight, "scale factor must be positive");
    WeightedGraph g = *this;
    g.id_ = detail::next_graph_id();
    for (double& w : g.weights_) w *= c;
    for (Vertex x = 0; x < g.vertex_count(); ++x) g.measure_[x] = g.canonical_measure(x);
    g.override_.clear();
    return g;
  }

 private:
  void sort_rows() {
    std::vector<std::pair<Vertex, double>> buf;
    for (std::size_t x = 0; x + 1 < offsets_.size(); ++x) {
      const std::size_t b = offsets_[x], e = offsets_[x + 1];
      buf.clear();
      for (std::size_t k = b; k < e; ++k) buf.emplace_back(neighbors_[k], weights_[k]);
      std::sort(buf.begin(), buf.end(), [](const auto& a, const auto& c) { return a.first < c.first; });
      for (std::size_t k = b; k < e; ++k) {
        neighbors_[k] = buf[k - b].first;
        weights_[k] = buf[k - b].second;
      }
    }
  }

  std::uint64_t id_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<Vertex> neighbors_;
  std::vector<double> weights_;
  std::vector<double> measure_;
  std::vector<double> override_;
};

inline WeightedGraph build_graph(std::span<const Edge> edges, std::size_t vertex_count) {
  return WeightedGraph::build(vertex_count, edges);
}

/// Sorted, duplicate-free set of vertex ids tied to one graph.
class VertexSet {
 public:
  VertexSet() = default;

  VertexSet(const WeightedGraph& g, std::vector<Vertex> ids)
      : ids_(std::move(ids)), graph_id_(g.id()), universe_(g.vertex_count()) {
    std::sort(ids_.begin(), ids_.end());
    ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
    if (!ids_.empty() && ids_.back() >= universe_) {
      fail(ErrorCode::IdOutOfRange, "vertex " + std::to_string(ids_.back()) + " not in graph");
    }
  }

  static VertexSet from_mask(const WeightedGraph& g, const std::vector<char>& mask) {
    VertexSet s;
    s.graph_id_ = g.id();
    s.universe_ = g.vertex_count();
    for (Vertex v = 0; v < mask.size(); ++v) {
      if (mask[v]) s.ids_.push_back(v);
    }
    return s;
  }

  static VertexSet all(const WeightedGraph& g) { return from_mask(g, std::vector<char>(g.vertex_count(), 1)); }

  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }
  auto begin() const noexcept { return ids_.begin(); }
  auto end() const noexcept { return ids_.end(); }
  const std::vector<Vertex>& ids() const noexcept { return ids_; }
  std::uint64_t graph_id() const noexcept { return graph_id_; }
  std::size_t universe() const noexcept { return universe_; }

  bool contains(Vertex v) const { return std::binary_search(ids_.begin(), ids_.end(), v); }

  std::vector<char> mask() const {
    std::vector<char> m(universe_, 0);
    for (Vertex v : ids_) m[v] = 1;
    return m;
  }

  bool subset_of(const VertexSet& other) const {
    return std::includes(other.ids_.begin(), other.ids_.end(), ids_.begin(), ids_.end());
  }

  VertexSet united(const VertexSet& o) const { return combine(o, Op::Union); }
  VertexSet intersected(const VertexSet& o) const { return combine(o, Op::Intersection); }
  VertexSet minus(const VertexSet& o) const { return combine(o, Op::Difference); }

  VertexSet complement() const {
    VertexSet s = like();
    std::size_t k = 0;
    for (Vertex v = 0; v < universe_; ++v) {
      if (k < ids_.size() && ids_[k] == v) {
        ++k;
      } else {
        s.ids_.push_back(v);
      }
    }
    return s;
  }

  bool operator==(const VertexSet& o) const { return graph_id_ == o.graph_id_ && ids_ == o.ids_; }

 private:
  enum class Op { Union, Intersection, Difference };

  VertexSet like() const {
    VertexSet s;
    s.graph_id_ = graph_id_;
    s.universe_ = universe_;
    return s;
  }

  VertexSet combine(const VertexSet& o, Op op) const {
    if (o.graph_id_ != graph_id_) fail(ErrorCode::GraphMismatch, "vertex sets belong to different graphs");
    VertexSet s = like();
    auto out = std::back_inserter(s.ids_);
    switch (op) {
      case Op::Union: std::set_union(begin(), end(), o.begin(), o.end(), out); break;
      case Op::Intersection: std::set_intersection(begin(), end(), o.begin(), o.end(), out); break;
      case Op::Difference: std::set_difference(begin(), end(), o.begin(), o.end(), out); break;
    }
    return s;
  }

  std::vector<Vertex> ids_;
  std::uint64_t graph_id_ = 0;
  std::size_t universe_ = 0;
};

inline void require_same_graph(const WeightedGraph& g, const VertexSet& s) {
  if (s.graph_id() != g.id() || s.universe() != g.vertex_count()) {
    fail(ErrorCode::GraphMismatch, "vertex set does not belong to this graph");
  }
}

inline void require_vertex(const WeightedGraph& g, Vertex x) {
  if (x >= g.vertex_count()) fail(ErrorCode::IdOutOfRange, "vertex " + std::to_string(x) + " not in graph");
}

inline constexpr std::int64_t kUnreachable = -1;

/// Hop distances from `source`; kUnreachable where no path exists.
/// `max_radius` stops the search early (vertices beyond it stay kUnreachable).
inline std::vector<std::int64_t> bfs_distances(const WeightedGraph& g, Vertex source,
                                               std::int64_t max_radius = std::numeric_limits<std::int64_t>::max()) {
  require_vertex(g, source);
  std::vector<std::int64_t> dist(g.vertex_count(), kUnreachable);
  std::vector<Vertex> frontier{source};
  dist[source] = 0;
  std::size_t head = 0;
  while (head < frontier.size()) {
    const Vertex x = frontier[head++];
    if (dist[x] >= max_radius) continue;
    for (Vertex y : g.neighbors(x)) {
      if (dist[y] == kUnreachable) {
        dist[y] = dist[x] + 1;
        frontier.push_back(y);
      }
    }
  }
  return dist;
}

/// Minimal number of edges on a path from x to y, or nullopt if unreachable.
inline std::optional<std::int64_t> graph_distance(const WeightedGraph& g, Vertex x, Vertex y) {
  require_vertex(g, y);
  if (x == y) {
    require_vertex(g, x);
    return 0;
  }
  const auto d = bfs_distances(g, x)[y];
  if (d == kUnreachable) return std::nullopt;
  return d;
}

/// Closed hop-metric ball B(center, r).
inline VertexSet ball(const WeightedGraph& g, Vertex center, std::int64_t r) {
  if (r < 0) fail(ErrorCode::InvalidArgument, "ball radius must be nonnegative");
  const auto dist = bfs_distances(g, center, r);
  std::vector<Vertex> ids;
  for (Vertex v = 0; v < dist.size(); ++v) {
    if (dist[v] != kUnreachable && dist[v] <= r) ids.push_back(v);
  }
  return VertexSet(g, std::move(ids));
}

/// Outer vertex boundary: vertices outside the set with a neighbor inside.
inline VertexSet vertex_boundary(const WeightedGraph& g, const VertexSet& omega) {
  require_same_graph(g, omega);
  const auto in = omega.mask();
  std::vector<char> out(g.vertex_count(), 0);
  for (Vertex x : omega) {
    for (Vertex y : g.neighbors(x)) {
      if (!in[y]) out[y] = 1;
    }
  }
  return VertexSet::from_mask(g, out);
}

struct BoundaryEdge {
  Vertex inside = 0;
  Vertex outside = 0;
  double weight = 0.0;
};

/// Crossing edges, each listed once and oriented from the set outwards.
inline std::vector<BoundaryEdge> edge_boundary(const WeightedGraph& g, const VertexSet& omega) {
  require_same_graph(g, omega);
  const auto in = omega.mask();
  std::vector<BoundaryEdge> out;
  for (Vertex x : omega) {
    const auto row = g.neighbors(x);
    const auto w = g.weights(x);
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (!in[row[k]]) out.push_back({x, row[k], w[k]});
    }
  }
  return out;
}

inline VertexSet closure(const WeightedGraph& g, const VertexSet& omega) {
  return omega.united(vertex_boundary(g, omega));
}

/// Connected component of the induced subgraph on `omega` containing x.
inline VertexSet component_of(const WeightedGraph& g, const VertexSet& omega, Vertex x) {
  require_same_graph(g, omega);
  if (!omega.contains(x)) fail(ErrorCode::XNotInSet, "vertex " + std::to_string(x) + " not in set");
  const auto in = omega.mask();
  std::vector<char> seen(g.vertex_count(), 0);
  std::vector<Vertex> stack{x};
  seen[x] = 1;
  std::vector<Vertex> ids;
  while (!stack.empty()) {
    const Vertex v = stack.back();
    stack.pop_back();
    ids.push_back(v);
    for (Vertex y : g.neighbors(v)) {
      if (in[y] && !seen[y]) {
        seen[y] = 1;
        stack.push_back(y);
      }
    }
  }
  return VertexSet(g, std::move(ids));
}

/// All connected components of the induced subgraph on `omega`, ordered by smallest id.
inline std::vector<VertexSet> components(const WeightedGraph& g, const VertexSet& omega) {
  require_same_graph(g, omega);
  std::vector<char> done(g.vertex_count(), 0);
  std::vector<VertexSet> out;
  for (Vertex x : omega) {
    if (done[x]) continue;
    auto c = component_of(g, omega, x);
    for (Vertex v : c) done[v] = 1;
    out.push_back(std::move(c));
  }
  return out;
}

/// Smallest p0 for which mu_xy / mu(x) >= 1/p0 on every edge.
inline double check_p0(const WeightedGraph& g) {
  double worst = 0.0;
  for (Vertex x = 0; x < g.vertex_count(); ++x) {
    for (double w : g.weights(x)) worst = std::max(worst, g.mu(x) / w);
  }
  return worst;
}

/// Induced subgraph on `omega` with local ids in the order of omega's ids.
/// Vertices that lose all their edges keep measure 0 in the subgraph.
struct InducedSubgraph {
  WeightedGraph graph;
  std::vector<Vertex> to_parent;
  std::vector<std::int64_t> to_local;  // -1 outside omega

  VertexSet lift_from(const VertexSet& parent_set) const {
    std::vector<Vertex> ids;
    for (Vertex v : parent_set) {
      if (to_local[v] >= 0) ids.push_back(static_cast<Vertex>(to_local[v]));
    }
    return VertexSet(graph, std::move(ids));
  }
};

inline InducedSubgraph induced_subgraph(const WeightedGraph& g, const VertexSet& omega) {
  require_same_graph(g, omega);
  InducedSubgraph sub;
  sub.to_parent = omega.ids();
  sub.to_local.assign(g.vertex_count(), -1);
  for (std::size_t i = 0; i < sub.to_parent.size(); ++i) sub.to_local[sub.to_parent[i]] = static_cast<std::int64_t>(i);
  std::vector<Edge> edges;
  for (Vertex x : omega) {
    const auto row = g.neighbors(x);
    const auto w = g.weights(x);
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (x < row[k] && sub.to_local[row[k]] >= 0) {
        edges.push_back({static_cast<Vertex>(sub.to_local[x]), static_cast<Vertex>(sub.to_local[row[k]]), w[k]});
      }
    }
  }
  sub.graph = WeightedGraph::build(sub.to_parent.size(), edges);
  return sub;
}

}  // namespace dpt
