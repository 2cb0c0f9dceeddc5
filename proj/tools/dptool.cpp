// dptool: batch driver for capacity, Wiener-series, massiveness and
// parabolicity experiments on weighted graphs and Z^d windows.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dpt/capacity.hpp"
#include "dpt/io.hpp"
#include "dpt/lattice.hpp"
#include "dpt/massiveness.hpp"
#include "dpt/oracles.hpp"
#include "dpt/selftest.hpp"
#include "dpt/wiener.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dpt;

namespace {

enum Exit { kOk = 0, kFailed = 1, kConfig = 2, kNoConvergence = 3, kWindow = 4 };

struct Flags {
  std::string config;
  std::string out = ".";
  bool deterministic = false;
  int threads = 1;
  std::optional<double> tol;
};

/// Raised while reading a config; everything in here maps to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json load_config(const std::string& path, const std::string& command) {
  if (path.empty()) throw ConfigError("--config is required");
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  if (j.contains("command") && j.at("command") != command) {
    throw ConfigError("config is for `" + j.at("command").dump() + "`, not `" + command + "`");
  }
  return j;
}

SolverOptions solver_options(const json& j, const Flags& f) {
  SolverOptions o;
  o.tol = detail::optional_or<double>(j, "tol", o.tol, "config");
  if (f.tol) o.tol = *f.tol;
  if (!(o.tol > 0.0)) throw ConfigError("tol must be positive");
  o.threads = f.threads;
  return o;
}

Lattice make_lattice(const json& j) {
  detail::only_keys(j, {"d", "R", "w"}, "lattice");
  return lattice_box(detail::required<int>(j, "d", "lattice"), detail::required<std::int64_t>(j, "R", "lattice"),
                     detail::optional_or<double>(j, "w", 0.0, "lattice"));
}

std::vector<std::int64_t> radii_of(const json& j, const char* key = "radii") {
  return detail::required<std::vector<std::int64_t>>(j, key, "config");
}

/// A vertex set given either as a lattice set spec, an id list or a file.
VertexSet make_set(const json& j, const WeightedGraph& g, const Lattice* lat, const fs::path& base) {
  const auto kind = detail::required<std::string>(j, "kind", "set spec");
  if (kind == "ids") {
    detail::only_keys(j, {"kind", "ids"}, "ids spec");
    const auto ids = detail::required<std::vector<std::int64_t>>(j, "ids", "ids spec");
    std::vector<Vertex> v;
    for (auto id : ids) {
      if (id < 0 || static_cast<std::size_t>(id) >= g.vertex_count()) throw ConfigError("vertex id out of range");
      v.push_back(static_cast<Vertex>(id));
    }
    return VertexSet(g, std::move(v));
  }
  if (kind == "file") {
    detail::only_keys(j, {"kind", "path"}, "file spec");
    std::ifstream in(base / detail::required<std::string>(j, "path", "file spec"));
    if (!in) throw ConfigError("cannot open vertex set file");
    return read_vertex_set(in, g);
  }
  if (!lat) throw ConfigError("set kind `" + kind + "` needs a lattice");
  return parse_set_spec(j, *lat);
}

Vertex point_or_origin(const json& j, const char* key, const Lattice& lat) {
  if (!j.contains(key)) return lat.window.origin();
  return parse_point(j.at(key), lat.window, key);
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

void write_json(const fs::path& path, json j, const Flags& f) {
  if (!f.deterministic) j["generated_at"] = timestamp();
  std::ofstream os(path);
  os << j.dump(2) << '\n';
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

json coord_json(const Lattice& lat, Vertex v) { return lat.window.coord(v); }

// ---------------------------------------------------------------------------

int cmd_capacity(const Flags& f) {
  const auto cfg = load_config(f.config, "capacity");
  detail::only_keys(cfg, {"command", "graph", "lattice", "source", "sink", "domain", "p", "tol", "cylinder_sweep"},
                    "capacity config");
  const fs::path base = fs::path(f.config).parent_path();
  const PExponent p(detail::required<double>(cfg, "p", "capacity config"));
  const auto opts = solver_options(cfg, f);

  std::optional<Lattice> lat;
  std::optional<WeightedGraph> file_graph;
  if (cfg.contains("lattice") == cfg.contains("graph")) throw ConfigError("give exactly one of `graph` and `lattice`");
  if (cfg.contains("lattice")) {
    lat = make_lattice(cfg.at("lattice"));
  } else {
    const auto& gj = cfg.at("graph");
    detail::only_keys(gj, {"file"}, "graph");
    std::ifstream in(base / detail::required<std::string>(gj, "file", "graph"));
    if (!in) throw ConfigError("cannot open graph file");
    file_graph = read_pgraph(in);
  }
  const WeightedGraph& g = lat ? lat->graph : *file_graph;
  const Lattice* lp = lat ? &*lat : nullptr;

  if (cfg.contains("cylinder_sweep")) {
    // Cylinders of radius r and height h_factor*r against the window's outer shell.
    if (!lat) throw ConfigError("cylinder_sweep needs a lattice");
    const auto& sj = cfg.at("cylinder_sweep");
    detail::only_keys(sj, {"r", "h_factor"}, "cylinder_sweep");
    const auto rs = detail::required<std::vector<std::int64_t>>(sj, "r", "cylinder_sweep");
    const auto hf = detail::optional_or<std::int64_t>(sj, "h_factor", 4, "cylinder_sweep");
    if (cfg.contains("source") || cfg.contains("sink") || cfg.contains("domain")) {
      throw ConfigError("cylinder_sweep replaces source, sink and domain");
    }
    const auto W = lat->window.radius;
    const auto shell = lat->window.select(g, [W](const Coord& c) {
      for (auto v : c) {
        if (v == -W || v == W) return true;
      }
      return false;
    });
    auto os = open_out(fs::path(f.out) / "cylinder_sweep.csv");
    os << "h,r,cap,uncertainty\n";
    os.precision(17);
    json rows = json::array();
    bool all_converged = true;
    std::vector<double> warm;
    for (auto r : rs) {
      const auto C = cylinder_set(g, lat->window, hf * r, r);
      if (!C.intersected(shell).empty()) fail(ErrorCode::WindowTooSmall, "cylinder reaches the window edge");
      const auto res = capacity(g, Condenser{C, shell, std::nullopt, p}, opts, warm);
      warm = res.potential.u;
      for (auto& v : warm) {
        if (!std::isfinite(v)) v = 0.0;
      }
      all_converged = all_converged && res.potential.converged;
      os << hf * r << ',' << r << ',' << res.value << ',' << res.uncertainty << '\n';
      rows.push_back({{"h", hf * r}, {"r", r}, {"cap", res.value}, {"uncertainty", res.uncertainty},
                      {"converged", res.potential.converged}});
    }
    write_json(fs::path(f.out) / "cylinder_sweep.json", {{"p", p.value()}, {"window_radius", W}, {"rows", rows}}, f);
    return all_converged ? kOk : kNoConvergence;
  }

  if (!cfg.contains("source") || !cfg.contains("sink")) throw ConfigError("capacity config needs `source` and `sink`");
  Condenser c{make_set(cfg.at("source"), g, lp, base), make_set(cfg.at("sink"), g, lp, base), std::nullopt, p};
  if (cfg.contains("domain")) c.domain = make_set(cfg.at("domain"), g, lp, base);

  const auto res = capacity(g, c, opts);
  write_json(fs::path(f.out) / "capacity.json", to_json(res, c), f);
  auto os = open_out(fs::path(f.out) / "potential.csv");
  write_solution_csv(os, g, res.potential, p);
  std::cout << "capacity " << res.value << " +- " << res.uncertainty << '\n';
  return res.potential.converged ? kOk : kNoConvergence;
}

int finish_wiener(const WienerReport& rep, const Flags& f) {
  write_json(fs::path(f.out) / "wiener.json", to_json(rep), f);
  auto os = open_out(fs::path(f.out) / "wiener.csv");
  write_wiener_csv(os, rep);
  std::cout << "fitted ratio " << rep.fit.ratio << " (" << to_string(rep.fit.verdict) << ")\n";
  for (const auto& s : rep.scales) {
    if (!s.converged) return kNoConvergence;
  }
  return kOk;
}

WienerOptions wiener_options(const json& cfg, const Flags& f) {
  WienerOptions wo;
  wo.solver = solver_options(cfg, f);
  wo.global_form = detail::optional_or<bool>(cfg, "global_form", false, "config");
  wo.global_scale = detail::optional_or<int>(cfg, "global_scale", 0, "config");
  return wo;
}

int cmd_wiener(const Flags& f) {
  const auto cfg = load_config(f.config, "wiener");
  detail::only_keys(cfg, {"command", "lattice", "set", "x0", "p", "N", "tol", "global_form", "global_scale",
                          "nonparabolic"},
                    "wiener config");
  const auto lat = make_lattice(detail::required<json>(cfg, "lattice", "wiener config"));
  const PExponent p(detail::required<double>(cfg, "p", "wiener config"));
  const auto A = make_set(detail::required<json>(cfg, "set", "wiener config"), lat.graph, &lat, {});
  const auto x0 = point_or_origin(cfg, "x0", lat);
  const int N = detail::required<int>(cfg, "N", "wiener config");
  const auto wo = wiener_options(cfg, f);
  std::optional<bool> np;
  if (cfg.contains("nonparabolic")) np = detail::required<bool>(cfg, "nonparabolic", "wiener config");
  return finish_wiener(wiener_report(lat, x0, A, p, N, wo, np), f);
}

/// Thorn presets: a thorn with profile f(n) = coeff * n^alpha (or an explicit
/// profile) in Z^d, window sized to the last dyadic scale.
int cmd_thorn(const Flags& f) {
  const auto cfg = load_config(f.config, "thorn");
  detail::only_keys(cfg, {"command", "d", "p", "N", "alpha", "coeff", "profile", "window", "tol"}, "thorn config");
  const int d = detail::optional_or<int>(cfg, "d", 3, "thorn config");
  const PExponent p(detail::optional_or<double>(cfg, "p", 1.5, "thorn config"));
  const int N = detail::optional_or<int>(cfg, "N", 5, "thorn config");
  if (N < 1 || N > 12) throw ConfigError("N must lie in [1, 12]");
  ThornProfile prof;
  if (cfg.contains("profile")) {
    if (cfg.contains("alpha") || cfg.contains("coeff")) throw ConfigError("give `profile` or `alpha`, not both");
    prof = parse_profile(cfg.at("profile"));
  } else {
    prof = ThornProfile::power(detail::optional_or<double>(cfg, "alpha", 0.5, "thorn config"),
                               detail::optional_or<double>(cfg, "coeff", 1.0, "thorn config"));
  }
  const auto W = detail::optional_or<std::int64_t>(cfg, "window", (std::int64_t{1} << (N + 1)) + 1, "thorn config");
  const auto lat = lattice_box(d, W);
  const auto A = thorn_set(lat.graph, lat.window, prof);
  WienerOptions wo;
  wo.solver = solver_options(cfg, f);
  return finish_wiener(wiener_report(lat, lat.window.origin(), A, p, N, wo), f);
}

int cmd_massive(const Flags& f) {
  const auto cfg = load_config(f.config, "massive");
  detail::only_keys(cfg, {"command", "lattice", "omega", "x0", "p", "radii", "tol", "dp_probe"}, "massive config");
  const auto lat = make_lattice(detail::required<json>(cfg, "lattice", "massive config"));
  const PExponent p(detail::required<double>(cfg, "p", "massive config"));
  const auto omega = make_set(detail::required<json>(cfg, "omega", "massive config"), lat.graph, &lat, {});
  const auto x0 = point_or_origin(cfg, "x0", lat);
  const auto radii = radii_of(cfg);
  const auto opts = solver_options(cfg, f);

  struct Probe {
    VertexSet omega1;
    Vertex center;
    Vertex k0;
    std::vector<std::int64_t> radii;
  };
  std::optional<Probe> probe;
  if (cfg.contains("dp_probe")) {
    const auto& pj = cfg.at("dp_probe");
    detail::only_keys(pj, {"omega1", "center", "k0", "radii"}, "dp_probe");
    probe = Probe{make_set(detail::required<json>(pj, "omega1", "dp_probe"), lat.graph, &lat, {}),
                  point_or_origin(pj, "center", lat),
                  parse_point(detail::required<json>(pj, "k0", "dp_probe"), lat.window, "k0"), radii_of(pj)};
  }

  const auto ev = massiveness_sequence(lat, omega, x0, p, radii, opts);
  bool converged = true;
  for (const auto& s : ev.sequence) converged = converged && s.converged;
  json out = to_json(ev);
  out["x0_coord"] = coord_json(lat, x0);
  {
    auto os = open_out(fs::path(f.out) / "massive.csv");
    write_sequence_csv(os, ev.sequence);
  }
  std::cout << "massiveness: " << to_string(ev.verdict) << '\n';
  if (probe) {
    const auto dp = dp_massiveness_probe(lat, omega, probe->omega1, probe->center, probe->k0, p, probe->radii, opts);
    for (const auto& s : dp.capacities) converged = converged && s.converged;
    out["dp_probe"] = to_json(dp);
    auto os = open_out(fs::path(f.out) / "dp_probe.csv");
    write_sequence_csv(os, dp.capacities);
    std::cout << "D_p probe: " << to_string(dp.verdict) << '\n';
  }
  write_json(fs::path(f.out) / "massive.json", out, f);
  return converged ? kOk : kNoConvergence;
}

int cmd_parabolic(const Flags& f) {
  const auto cfg = load_config(f.config, "parabolic");
  detail::only_keys(cfg, {"command", "lattice", "K", "x0", "p", "radii", "tol", "within", "mc"}, "parabolic config");
  const auto lat = make_lattice(detail::required<json>(cfg, "lattice", "parabolic config"));
  const PExponent p(detail::required<double>(cfg, "p", "parabolic config"));
  const auto x0 = point_or_origin(cfg, "x0", lat);
  const auto K = cfg.contains("K") ? make_set(cfg.at("K"), lat.graph, &lat, {}) : VertexSet(lat.graph, {x0});
  std::optional<VertexSet> within;
  if (cfg.contains("within")) within = make_set(cfg.at("within"), lat.graph, &lat, {});
  const auto radii = radii_of(cfg);
  const auto opts = solver_options(cfg, f);
  std::size_t samples = 0;
  std::uint64_t seed = 1;
  if (cfg.contains("mc")) {
    const auto& m = cfg.at("mc");
    detail::only_keys(m, {"samples", "seed"}, "mc");
    samples = detail::required<std::size_t>(m, "samples", "mc");
    seed = detail::optional_or<std::uint64_t>(m, "seed", 1, "mc");
    if (p.value() != 2.0) throw ConfigError("the random-walk cross-check needs p = 2");
    if (K.size() != 1 || !K.contains(x0)) throw ConfigError("the random-walk cross-check needs K = {x0}");
  }

  const auto ev = parabolicity_sequence(lat, K, x0, p, radii, opts, within);
  bool converged = true;
  for (const auto& s : ev.sequence) converged = converged && s.converged;
  json out = to_json(ev);
  {
    auto os = open_out(fs::path(f.out) / "parabolic.csv");
    write_sequence_csv(os, ev.sequence);
  }
  if (samples > 0) {
    const auto omega = within ? *within : VertexSet::all(lat.graph);
    const auto est = mc_escape_probability(lat.graph, omega, x0, samples, radii, seed, true);
    json mc = json::array();
    for (std::size_t i = 0; i < est.size(); ++i) {
      const double expected = ev.sequence[i].value / lat.graph.mu(x0);
      mc.push_back({{"R", est[i].radius},
                    {"escape", est[i].probability},
                    {"stderr", est[i].stderr_estimate},
                    {"cap_over_mu", expected},
                    {"z", (est[i].probability - expected) / std::max(est[i].stderr_estimate, 1e-300)}});
    }
    out["mc"] = {{"samples", samples}, {"seed", seed}, {"estimates", mc}};
  }
  write_json(fs::path(f.out) / "parabolic.json", out, f);
  std::cout << "parabolicity: " << to_string(ev.verdict) << '\n';
  return converged ? kOk : kNoConvergence;
}

int cmd_selftest(const Flags& f) {
  bool ok = true;
  for (const auto& c : run_property_suite(std::max(2, f.threads))) {
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " : " << c.detail << '\n';
    ok = ok && c.pass;
  }
  return ok ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"p-capacity and p-massiveness experiments on graphs"};
  app.require_subcommand(1);
  Flags flags;
  app.add_option("--out", flags.out, "output directory")->capture_default_str();
  app.add_flag("--deterministic", flags.deterministic, "leave timestamps out of the outputs");
  app.add_option("--threads", flags.threads, "worker threads for coloured sweeps")->check(CLI::PositiveNumber);
  app.add_option("--tol", flags.tol, "residual tolerance, overrides the config");

  struct Cmd {
    const char* name;
    const char* help;
    int (*run)(const Flags&);
  };
  const Cmd cmds[] = {
      {"capacity", "capacity of a condenser, or a cylinder sweep", cmd_capacity},
      {"wiener", "Wiener series terms over dyadic scales", cmd_wiener},
      {"thorn", "Wiener series of a thorn preset", cmd_thorn},
      {"massive", "massiveness sequence, optionally with the D_p probe", cmd_massive},
      {"parabolic", "capacities of a fixed set against growing balls", cmd_parabolic},
      {"selftest", "invariant suite", cmd_selftest},
  };
  int (*chosen)(const Flags&) = nullptr;
  for (const auto& c : cmds) {
    auto* sub = app.add_subcommand(c.name, c.help);
    sub->fallthrough();
    if (std::string(c.name) != "selftest") sub->add_option("--config", flags.config, "JSON config")->required();
    sub->callback([&chosen, run = c.run] { chosen = run; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfig;
  }

  try {
    fs::create_directories(flags.out);
    return chosen(flags);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    switch (e.code()) {
      case ErrorCode::WindowTooSmall: return kWindow;
      case ErrorCode::Parse:
      case ErrorCode::IdOutOfRange:
      case ErrorCode::InvalidArgument: return kConfig;
      default: return kFailed;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailed;
  }
}
