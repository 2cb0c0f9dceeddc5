#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "dpt/error.hpp"
#include "dpt/graph.hpp"
#include "dpt/lattice.hpp"

namespace dpt {

// pgraph v1: header `pgraph v1 <n>`, then `x y weight` per undirected edge.

inline WeightedGraph read_pgraph(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) fail(ErrorCode::Parse, "empty pgraph input");
  std::istringstream head(line);
  std::string magic, version;
  long long n = -1;
  if (!(head >> magic >> version >> n) || magic != "pgraph" || version != "v1" || n < 0) {
    fail(ErrorCode::Parse, "expected header `pgraph v1 <n>`");
  }
  std::vector<Edge> edges;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    long long x = -1, y = -1;
    double w = 0.0;
    std::string rest;
    if (!(ls >> x >> y >> w) || (ls >> rest) || x < 0 || y < 0) {
      fail(ErrorCode::Parse, "bad edge on line " + std::to_string(lineno));
    }
    edges.push_back({static_cast<Vertex>(x), static_cast<Vertex>(y), w});
    if (x >= n || y >= n) fail(ErrorCode::IdOutOfRange, "vertex id out of range on line " + std::to_string(lineno));
  }
  return build_graph(edges, static_cast<std::size_t>(n));
}

inline void write_pgraph(std::ostream& os, const WeightedGraph& g) {
  os << "pgraph v1 " << g.vertex_count() << '\n';
  os.precision(17);
  for (const auto& e : g.edges()) os << e.x << ' ' << e.y << ' ' << e.weight << '\n';
}

inline VertexSet read_vertex_set(std::istream& is, const WeightedGraph& g) {
  std::vector<Vertex> ids;
  long long v;
  while (is >> v) {
    if (v < 0 || static_cast<std::size_t>(v) >= g.vertex_count()) {
      fail(ErrorCode::IdOutOfRange, "vertex id " + std::to_string(v) + " out of range");
    }
    ids.push_back(static_cast<Vertex>(v));
  }
  if (!is.eof()) fail(ErrorCode::Parse, "vertex set file must hold one integer id per line");
  return VertexSet(g, std::move(ids));
}

inline void write_vertex_set(std::ostream& os, const VertexSet& s) {
  for (Vertex v : s) os << v << '\n';
}

// ---------------------------------------------------------------------------
// JSON set specs over a lattice window

namespace detail {

inline void only_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) fail(ErrorCode::Parse, where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed) ok = ok || it.key() == k;
    if (!ok) fail(ErrorCode::Parse, "unknown key `" + it.key() + "` in " + where);
  }
}

template <class T>
T required(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) fail(ErrorCode::Parse, where + " is missing `" + key + "`");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, "bad `" + std::string(key) + "` in " + where + ": " + e.what());
  }
}

template <class T>
T optional_or(const nlohmann::json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  return required<T>(j, key, where);
}

}  // namespace detail

inline ThornProfile parse_profile(const nlohmann::json& j) {
  const std::string where = "thorn profile";
  const auto type = detail::required<std::string>(j, "type", where);
  if (type == "constant") {
    detail::only_keys(j, {"type", "num", "den", "value"}, where);
    if (j.contains("value")) return ThornProfile::constant(detail::required<std::int64_t>(j, "value", where));
    return ThornProfile::constant(detail::required<std::int64_t>(j, "num", where),
                                  detail::optional_or<std::int64_t>(j, "den", 1, where));
  }
  if (type == "linear") {
    detail::only_keys(j, {"type", "num", "den"}, where);
    return ThornProfile::linear(detail::optional_or<std::int64_t>(j, "num", 1, where),
                                detail::optional_or<std::int64_t>(j, "den", 1, where));
  }
  if (type == "power") {
    detail::only_keys(j, {"type", "alpha", "coeff"}, where);
    return ThornProfile::power(detail::required<double>(j, "alpha", where),
                               detail::optional_or<double>(j, "coeff", 1.0, where));
  }
  fail(ErrorCode::Parse, "unknown profile type `" + type + "`");
}

inline Vertex parse_point(const nlohmann::json& j, const LatticeWindow& win, const std::string& where) {
  if (!j.is_array() || static_cast<int>(j.size()) != win.dim) {
    fail(ErrorCode::Parse, where + " must be an array of " + std::to_string(win.dim) + " integers");
  }
  Coord c;
  for (const auto& v : j) {
    if (!v.is_number_integer()) fail(ErrorCode::Parse, where + " must hold integers");
    c.push_back(v.get<std::int64_t>());
  }
  if (!win.inside(c)) fail(ErrorCode::IdOutOfRange, where + " lies outside the window");
  return win.id(c);
}

/// Kinds: thorn, cylinder, axis, ball, complement, union, intersection,
/// halfspace and vertices (explicit lattice points).
inline VertexSet parse_set_spec(const nlohmann::json& j, const Lattice& lat) {
  const auto& g = lat.graph;
  const auto& win = lat.window;
  const std::string where = "set spec";
  const auto kind = detail::required<std::string>(j, "kind", where);
  if (kind == "thorn") {
    detail::only_keys(j, {"kind", "f"}, "thorn spec");
    if (!j.contains("f")) fail(ErrorCode::Parse, "thorn spec is missing `f`");
    return thorn_set(g, win, parse_profile(j.at("f")));
  }
  if (kind == "cylinder") {
    detail::only_keys(j, {"kind", "h", "r"}, "cylinder spec");
    return cylinder_set(g, win, detail::required<std::int64_t>(j, "h", "cylinder spec"),
                        detail::required<std::int64_t>(j, "r", "cylinder spec"));
  }
  if (kind == "axis") {
    detail::only_keys(j, {"kind"}, "axis spec");
    return axis_set(g, win);
  }
  if (kind == "ball") {
    detail::only_keys(j, {"kind", "center", "radius"}, "ball spec");
    const Vertex c = j.contains("center") ? parse_point(j.at("center"), win, "ball center") : win.origin();
    return ball(g, c, detail::required<std::int64_t>(j, "radius", "ball spec"));
  }
  if (kind == "complement") {
    detail::only_keys(j, {"kind", "of"}, "complement spec");
    if (!j.contains("of")) fail(ErrorCode::Parse, "complement spec is missing `of`");
    return parse_set_spec(j.at("of"), lat).complement();
  }
  if (kind == "union" || kind == "intersection") {
    detail::only_keys(j, {"kind", "of"}, kind + " spec");
    if (!j.contains("of") || !j.at("of").is_array() || j.at("of").empty()) {
      fail(ErrorCode::Parse, kind + " spec needs a nonempty array `of`");
    }
    VertexSet acc = parse_set_spec(j.at("of").at(0), lat);
    for (std::size_t i = 1; i < j.at("of").size(); ++i) {
      const auto next = parse_set_spec(j.at("of").at(i), lat);
      acc = kind == "union" ? acc.united(next) : acc.intersected(next);
    }
    return acc;
  }
  if (kind == "halfspace") {
    detail::only_keys(j, {"kind", "axis", "min", "max"}, "halfspace spec");
    const auto a = detail::optional_or<int>(j, "axis", 0, "halfspace spec");
    if (a < 0 || a >= win.dim) fail(ErrorCode::Parse, "halfspace axis out of range");
    const auto lo = detail::optional_or<std::int64_t>(j, "min", -win.radius, "halfspace spec");
    const auto hi = detail::optional_or<std::int64_t>(j, "max", win.radius, "halfspace spec");
    return win.select(g, [&](const Coord& c) { return c[a] >= lo && c[a] <= hi; });
  }
  if (kind == "vertices") {
    detail::only_keys(j, {"kind", "points"}, "vertices spec");
    if (!j.contains("points") || !j.at("points").is_array()) fail(ErrorCode::Parse, "vertices spec needs `points`");
    std::vector<Vertex> ids;
    for (const auto& pt : j.at("points")) ids.push_back(parse_point(pt, win, "point"));
    return VertexSet(g, std::move(ids));
  }
  fail(ErrorCode::Parse, "unknown set kind `" + kind + "`");
}

}  // namespace dpt
