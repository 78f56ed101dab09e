#pragma once

// Run configuration (JSON file with flat dotted keys, overridden by flags)
// and the experiment drivers behind the command-line tool.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "json.hpp"
#include "report_io.hpp"

namespace poroflow::cli {

using Json = nlohmann::json;

enum class Experiment { Convergence, Adaptive, Solve };
enum class CaseKind { Example1, Example3, Custom };

/// Parameter values by name and an optional permeability law.
struct ParameterOverrides {
  std::map<std::string, double> values;
  std::optional<PermeabilityLaw> law;

  void apply(ParameterSet& prm) const;
};

struct RunConfig {
  Experiment experiment = Experiment::Convergence;
  CaseKind case_kind = CaseKind::Example1;
  /// Empty: the case's own geometry.
  std::optional<Geometry> geometry;
  std::string mesh_path;
  int levels = 5;
  /// Empty: 2, or 1 on the L-shape.
  std::optional<int> n;
  SolverConfig solver;
  /// Present iff the experiment is adaptive.
  std::optional<MarkingConfig> marking;
  MarkingStrategy strategy = MarkingStrategy::Threshold;
  BisectionRule refinement = BisectionRule::Bisec3;
  ParameterOverrides params;
  std::map<int, ParameterOverrides> regions;
  std::string out_dir = ".";
  bool vtk = false;

  Geometry resolved_geometry() const;
  int resolved_n() const;
};

// ------------------------------------------------------------------ names

inline const char* experiment_name(Experiment e) {
  switch (e) {
    case Experiment::Convergence:
      return "convergence";
    case Experiment::Adaptive:
      return "adaptive";
    case Experiment::Solve:
      return "solve";
  }
  return "?";
}

namespace detail {

[[noreturn]] inline void fail(const std::string& key, const std::string& msg) {
  throw ConfigError(key + ": " + msg);
}

template <typename E>
E lookup(const std::string& key, const std::string& value, const std::vector<std::pair<const char*, E>>& table) {
  std::string choices;
  for (const auto& [name, e] : table) {
    if (value == name) return e;
    choices += (choices.empty() ? "" : "|") + std::string(name);
  }
  fail(key, "expected one of {" + choices + "}, got '" + value + "'");
}

inline std::string as_string(const std::string& key, const Json& v) {
  if (!v.is_string()) fail(key, "expected a string");
  return v.get<std::string>();
}

inline double as_number(const std::string& key, const Json& v) {
  if (!v.is_number()) fail(key, "expected a number");
  return v.get<double>();
}

inline int as_int(const std::string& key, const Json& v) {
  if (!v.is_number_integer()) fail(key, "expected an integer");
  return v.get<int>();
}

inline bool as_bool(const std::string& key, const Json& v) {
  if (!v.is_boolean()) fail(key, "expected a boolean");
  return v.get<bool>();
}

inline void flatten(const Json& j, const std::string& prefix, std::map<std::string, Json>& out) {
  if (!j.is_object()) fail(prefix.empty() ? "<root>" : prefix, "expected an object");
  for (const auto& [k, v] : j.items()) {
    const std::string key = prefix.empty() ? k : prefix + "." + k;
    if (v.is_object())
      flatten(v, key, out);
    else if (v.is_array() || v.is_null())
      fail(key, "expected a scalar value");
    else
      out[key] = v;
  }
}

inline const std::vector<std::pair<const char*, PermeabilityLaw>>& law_names() {
  static const std::vector<std::pair<const char*, PermeabilityLaw>> t{{"exp", PermeabilityLaw::Exponential},
                                                                       {"kc", PermeabilityLaw::KozenyCarman}};
  return t;
}

inline bool is_parameter_name(const std::string& s) {
  static const std::set<std::string> names{"lambda", "mu", "alpha", "c0", "k0", "k1", "k2", "mu_f"};
  return names.count(s) > 0;
}

inline void set_parameter(ParameterOverrides& p, const std::string& key, const std::string& name, const Json& v) {
  if (name == "law")
    p.law = lookup(key, as_string(key, v), law_names());
  else if (is_parameter_name(name))
    p.values[name] = as_number(key, v);
  else
    fail(key, "unknown key");
}

inline void set_key(RunConfig& c, const std::string& key, const Json& v) {
  if (key == "experiment") {
    c.experiment = lookup(key, as_string(key, v),
                          std::vector<std::pair<const char*, Experiment>>{{"convergence", Experiment::Convergence},
                                                                          {"adaptive", Experiment::Adaptive},
                                                                          {"solve", Experiment::Solve}});
  } else if (key == "case") {
    c.case_kind = lookup(key, as_string(key, v),
                         std::vector<std::pair<const char*, CaseKind>>{
                             {"example1", CaseKind::Example1}, {"example3", CaseKind::Example3}, {"custom", CaseKind::Custom}});
  } else if (key == "geometry") {
    const std::string g = as_string(key, v);
    if (g.rfind("mesh:", 0) == 0) {
      c.geometry = Geometry::MeshFile;
      c.mesh_path = g.substr(5);
      if (c.mesh_path.empty()) fail(key, "empty mesh path");
    } else {
      c.geometry = lookup(key, g,
                          std::vector<std::pair<const char*, Geometry>>{{"unit_square", Geometry::UnitSquare},
                                                                        {"lshape", Geometry::LShape}});
    }
  } else if (key == "levels") {
    c.levels = as_int(key, v);
  } else if (key == "n") {
    c.n = as_int(key, v);
  } else if (key == "solver.method") {
    c.solver.method = lookup(key, as_string(key, v),
                             std::vector<std::pair<const char*, SolverMethod>>{{"picard", SolverMethod::Picard},
                                                                               {"newton", SolverMethod::Newton}});
  } else if (key == "solver.tol") {
    c.solver.tol = as_number(key, v);
  } else if (key == "solver.max_iterations") {
    c.solver.max_iterations = as_int(key, v);
  } else if (key == "marking.zeta") {
    c.marking = MarkingConfig{as_number(key, v)};
  } else if (key == "marking.strategy") {
    c.strategy = lookup(key, as_string(key, v),
                        std::vector<std::pair<const char*, MarkingStrategy>>{{"threshold", MarkingStrategy::Threshold},
                                                                             {"dorfler", MarkingStrategy::Dorfler}});
  } else if (key == "marking.refinement") {
    c.refinement = lookup(key, as_string(key, v),
                          std::vector<std::pair<const char*, BisectionRule>>{{"bisec3", BisectionRule::Bisec3},
                                                                             {"single", BisectionRule::Single}});
  } else if (key == "output.dir") {
    c.out_dir = as_string(key, v);
  } else if (key == "output.vtk") {
    c.vtk = as_bool(key, v);
  } else if (key.rfind("params.", 0) == 0) {
    set_parameter(c.params, key, key.substr(7), v);
  } else if (key.rfind("regions.", 0) == 0) {
    const std::string rest = key.substr(8);
    const auto dot = rest.find('.');
    if (dot == std::string::npos) fail(key, "expected regions.<id>.<parameter>");
    int id = 0;
    const std::string ids = rest.substr(0, dot);
    const auto res = std::from_chars(ids.data(), ids.data() + ids.size(), id);
    if (res.ec != std::errc() || res.ptr != ids.data() + ids.size()) fail(key, "region id must be an integer");
    set_parameter(c.regions[id], key, rest.substr(dot + 1), v);
  } else {
    fail(key, "unknown key");
  }
}

}  // namespace detail

inline void ParameterOverrides::apply(ParameterSet& prm) const {
  for (const auto& [name, v] : values) {
    if (name == "lambda") prm.lambda = v;
    else if (name == "mu") prm.mu = v;
    else if (name == "alpha") prm.alpha = v;
    else if (name == "c0") prm.c0 = v;
    else if (name == "k0") prm.k0 = v;
    else if (name == "k1") prm.k1 = v;
    else if (name == "k2") prm.k2 = v;
    else if (name == "mu_f") prm.mu_f = v;
  }
  if (law) prm.law = *law;
}

inline Geometry RunConfig::resolved_geometry() const {
  if (geometry) return *geometry;
  return case_kind == CaseKind::Example3 ? Geometry::LShape : Geometry::UnitSquare;
}

inline int RunConfig::resolved_n() const {
  if (n) return *n;
  return resolved_geometry() == Geometry::LShape ? 1 : 2;
}

/// The case with parameter overrides applied; throws ConfigError on invalid
/// parameters.
inline ManufacturedCase make_case(const RunConfig& cfg) {
  ManufacturedCase c;
  switch (cfg.case_kind) {
    case CaseKind::Example1:
      c = example1_case();
      break;
    case CaseKind::Example3:
      c = example3_case();
      break;
    case CaseKind::Custom:
      c = custom_case(Materials{}, cfg.resolved_geometry());
      break;
  }
  cfg.params.apply(c.materials.base);
  for (const auto& [id, o] : cfg.regions) {
    ParameterSet prm = c.materials.base;
    o.apply(prm);
    c.materials.regions[id] = prm;
  }
  auto check = [](const ParameterSet& p, const std::string& where) {
    try {
      p.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(where + ": " + e.what());
    }
  };
  check(c.materials.base, "params");
  for (const auto& [id, p] : c.materials.regions) check(p, "regions." + std::to_string(id));
  return c;
}

inline void validate(const RunConfig& c) {
  if (c.levels < 1) detail::fail("levels", "must be >= 1");
  if (c.n && *c.n < 1) detail::fail("n", "must be >= 1");
  if (!(c.solver.tol > 0.0)) detail::fail("solver.tol", "must be > 0");
  if (c.solver.max_iterations < 1) detail::fail("solver.max_iterations", "must be >= 1");
  if (c.experiment == Experiment::Adaptive && !c.marking) detail::fail("marking.zeta", "required for adaptive runs");
  if (c.experiment != Experiment::Adaptive && c.marking) detail::fail("marking.zeta", "only valid for adaptive runs");
  if (c.marking && !(c.marking->zeta > 0.0 && c.marking->zeta <= 1.0)) detail::fail("marking.zeta", "must lie in (0, 1]");
  if (c.resolved_geometry() == Geometry::MeshFile && !std::filesystem::is_regular_file(c.mesh_path))
    detail::fail("geometry", "mesh file '" + c.mesh_path + "' does not exist");
  make_case(c);
}

/// Builds a validated configuration from a JSON document and flat overrides
/// (the latter win).
inline RunConfig parse_config(const Json& file, const std::map<std::string, Json>& overrides = {}) {
  std::map<std::string, Json> flat;
  detail::flatten(file, "", flat);
  for (const auto& [k, v] : overrides) flat[k] = v;
  RunConfig c;
  for (const auto& [k, v] : flat) detail::set_key(c, k, v);
  validate(c);
  return c;
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
}

inline RunConfig parse_config(const std::string& path, const std::map<std::string, Json>& overrides = {}) {
  return parse_config(read_json_file(path), overrides);
}

// -------------------------------------------------------------------- run

inline void print_table(const std::vector<TableRow>& rows, std::ostream& out) {
  auto rate = [](double r) {
    if (std::isnan(r)) return std::string("   *");
    char b[32];
    std::snprintf(b, sizeof b, "%5.2f", r);
    return std::string(b);
  };
  auto sci = [](double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%9.2e", v);
    return std::string(b);
  };
  out << "level     dofs       h   e_sigma  rate       e_u  rate     e_rho  rate     e_phi  rate       e_p  rate"
         "   e_total  rate     equ_h    mass_h  iters        xi    eff\n";
  for (const TableRow& r : rows) {
    char head[64];
    std::snprintf(head, sizeof head, "%5d %8ld %7.4f", r.level, static_cast<long>(r.dofs), r.h);
    out << head << ' ' << sci(r.e_sigma) << ' ' << rate(r.rate_sigma) << ' ' << sci(r.e_u) << ' ' << rate(r.rate_u)
        << ' ' << sci(r.e_rho) << ' ' << rate(r.rate_rho) << ' ' << sci(r.e_phi) << ' ' << rate(r.rate_phi) << ' '
        << sci(r.e_p) << ' ' << rate(r.rate_p) << ' ' << sci(r.e_total) << ' ' << rate(r.rate_total) << ' '
        << sci(r.equ_h) << ' ' << sci(r.mass_h) << ' ';
    char tail[64];
    std::snprintf(tail, sizeof tail, "%6d %9.2e %6.2f", r.newton_iters, r.xi, r.eff);
    out << tail << '\n';
  }
}

/// Runs the configured experiment and writes <out>/<experiment>.csv plus
/// VTK files (always for solve, per level with vtk = true).
inline std::vector<TableRow> execute(const RunConfig& cfg, std::ostream& log) {
  const ManufacturedCase c = make_case(cfg);
  const TriMesh mesh = initial_mesh(cfg.resolved_geometry(), cfg.resolved_n(), cfg.mesh_path);
  StudyConfig study;
  study.solver = cfg.solver;
  if (cfg.marking) study.marking = *cfg.marking;
  study.strategy = cfg.strategy;
  study.refinement = cfg.refinement;

  std::vector<LevelRecord> levels;
  switch (cfg.experiment) {
    case Experiment::Convergence:
      levels = convergence_study(c, mesh, study, cfg.levels);
      break;
    case Experiment::Adaptive:
      levels = adaptive_loop(c, mesh, study, cfg.levels);
      break;
    case Experiment::Solve:
      levels = convergence_study(c, mesh, study, 1);
      break;
  }
  const RateMode mode = cfg.experiment == Experiment::Adaptive ? RateMode::Dofs : RateMode::MeshSize;
  const std::vector<TableRow> rows = make_table(levels, mode);

  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + cfg.out_dir + "': " + ec.message());
  const std::filesystem::path dir(cfg.out_dir);
  const std::string name = experiment_name(cfg.experiment);
  write_csv(rows, (dir / (name + ".csv")).string());
  if (cfg.vtk || cfg.experiment == Experiment::Solve)
    for (std::size_t l = 0; l < levels.size(); ++l)
      write_vtk(levels[l].solution, levels[l].estimate.xi2,
                (dir / (name + "_level" + std::to_string(l) + ".vtk")).string());
  print_table(rows, log);
  return rows;
}

/// Exit status of an error: config 2, mesh 3, solver and physics 4, io 5.
inline int exit_code(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const MeshError*>(&e)) return 3;
  if (dynamic_cast<const SolverError*>(&e) || dynamic_cast<const PhysicsError*>(&e)) return 4;
  if (dynamic_cast<const IoError*>(&e)) return 5;
  return 1;
}

inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    execute(cfg, out);
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code(e);
  }
}

/// Entry point of the command-line tool.
inline int main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Mixed finite element solver for nonlinear poroelasticity"};
  app.require_subcommand(0, 1);
  std::string config_path;
  std::optional<std::string> case_name, geometry, method, law, out_dir, marking;
  std::optional<int> levels, n;
  std::optional<double> tol, zeta;
  bool vtk = false;
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--case", case_name, "example1|example3|custom");
  app.add_option("--geometry", geometry, "unit_square|lshape|mesh:PATH");
  app.add_option("--levels", levels, "number of levels");
  app.add_option("--n", n, "initial subdivisions per unit length");
  app.add_option("--method", method, "picard|newton");
  app.add_option("--tol", tol, "nonlinear tolerance");
  app.add_option("--law", law, "exp|kc");
  app.add_option("--zeta", zeta, "bulk density for marking");
  app.add_option("--marking", marking, "threshold|dorfler");
  app.add_option("--out", out_dir, "output directory");
  app.add_flag("--vtk", vtk, "write fields for every level");
  app.fallthrough();
  for (const char* s : {"convergence", "adaptive", "solve"}) app.add_subcommand(s, std::string(s) + " experiment");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  std::map<std::string, Json> flags;
  for (const CLI::App* sub : app.get_subcommands()) flags["experiment"] = sub->get_name();
  if (case_name) flags["case"] = *case_name;
  if (geometry) flags["geometry"] = *geometry;
  if (levels) flags["levels"] = *levels;
  if (n) flags["n"] = *n;
  if (method) flags["solver.method"] = *method;
  if (tol) flags["solver.tol"] = *tol;
  if (law) flags["params.law"] = *law;
  if (zeta) flags["marking.zeta"] = *zeta;
  if (marking) flags["marking.strategy"] = *marking;
  if (out_dir) flags["output.dir"] = *out_dir;
  if (vtk) flags["output.vtk"] = true;

  RunConfig cfg;
  try {
    cfg = parse_config(config_path.empty() ? Json::object() : read_json_file(config_path), flags);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code(e);
  }
  return run(cfg, out, err);
}

}  // namespace poroflow::cli
