#pragma once

// Experiment drivers: uniform refinement studies and the
// solve-estimate-mark-refine loop.

#include "estimator.hpp"
#include "mesh_io.hpp"

namespace poroflow {

enum class MarkingStrategy {
  Dorfler,    // smallest set reaching zeta times the total
  Threshold,  // every cell with share >= zeta, plus the Dorfler set
};

struct LevelRecord {
  Solution solution;
  EstimatorReport estimate;
  ErrorReport errors;
  ConservationMetrics conservation;

  const TriMesh& mesh() const { return *solution.mesh; }
  double efficiency() const { return efficiency_index(errors.total(), estimate.xi); }
};

struct StudyConfig {
  SolverConfig solver;
  MarkingConfig marking;
  MarkingStrategy strategy = MarkingStrategy::Dorfler;
  BisectionRule refinement = BisectionRule::Single;
  /// Empty: ProjectedDiv for cases with a singular point, Analytic otherwise.
  std::optional<DivErrorMode> error_mode;
};

inline DivErrorMode error_mode_for(const ManufacturedCase& c, const StudyConfig& cfg) {
  if (cfg.error_mode) return *cfg.error_mode;
  return c.singular_point ? DivErrorMode::ProjectedDiv : DivErrorMode::Analytic;
}

/// Starting mesh for a built-in geometry with n cells per unit length.
inline TriMesh initial_mesh(Geometry g, int n, const std::string& path = {}) {
  switch (g) {
    case Geometry::UnitSquare:
      return unit_square_mesh(n);
    case Geometry::LShape:
      return lshape_mesh(n);
    case Geometry::MeshFile:
      return read_mesh(path);
  }
  throw std::invalid_argument("initial_mesh: unknown geometry");
}

inline std::vector<Index> mark(const std::vector<double>& xi2, const MarkingConfig& cfg, MarkingStrategy s) {
  return s == MarkingStrategy::Dorfler ? dorfler_mark(xi2, cfg) : threshold_mark(xi2, cfg);
}

namespace detail {

inline LevelRecord run_level(const TriMesh& mesh, const ManufacturedCase& c, const StudyConfig& cfg, int level) {
  try {
    LevelRecord r;
    r.solution = solve(mesh, c, cfg.solver);
    r.estimate = estimate(r.solution, c);
    r.errors = compute_errors(r.solution, c, error_mode_for(c, cfg));
    r.conservation = conservation_metrics(r.solution, c);
    return r;
  } catch (const SolverError& e) {
    throw SolverError("level " + std::to_string(level) + ": " + e.what(), e.history());
  } catch (const PhysicsError& e) {
    throw PhysicsError("level " + std::to_string(level) + ": " + e.what());
  }
}

}  // namespace detail

/// `levels` solves on successive uniform refinements of `initial`.
inline std::vector<LevelRecord> convergence_study(const ManufacturedCase& c, const TriMesh& initial,
                                                  const StudyConfig& cfg, int levels) {
  if (levels < 1) throw std::invalid_argument("convergence_study: levels must be >= 1");
  std::vector<LevelRecord> out;
  TriMesh mesh = initial;
  for (int l = 0; l < levels; ++l) {
    if (l > 0) mesh = uniform_refine(mesh);
    out.push_back(detail::run_level(mesh, c, cfg, l));
  }
  return out;
}

/// Solve, estimate, mark and bisect, `levels` times from `initial`.
inline std::vector<LevelRecord> adaptive_loop(const ManufacturedCase& c, const TriMesh& initial, const StudyConfig& cfg,
                                              int levels) {
  if (levels < 1) throw std::invalid_argument("adaptive_loop: levels must be >= 1");
  cfg.marking.validate();
  std::vector<LevelRecord> out;
  TriMesh mesh = initial;
  for (int l = 0; l < levels; ++l) {
    if (l > 0) mesh = bisect_refine(mesh, mark(out.back().estimate.xi2, cfg.marking, cfg.strategy), cfg.refinement);
    out.push_back(detail::run_level(mesh, c, cfg, l));
  }
  return out;
}

inline std::vector<ErrorReport> error_history(const std::vector<LevelRecord>& levels) {
  std::vector<ErrorReport> out;
  for (const LevelRecord& r : levels) out.push_back(r.errors);
  return out;
}

}  // namespace poroflow
