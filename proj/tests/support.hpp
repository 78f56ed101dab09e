#pragma once

// Shared fixtures: small meshes, a polynomial case whose data every rule
// integrates exactly, and interpolation of a case into the discrete spaces.

#include <filesystem>
#include <string>

#include "poroflow/poroflow.hpp"

namespace support {

using namespace poroflow;

/// Quadratic u and p with constant permeability (k1 = 0): f is linear and g quadratic.
inline ManufacturedCase polynomial_case(const ParameterSet& base = {}) {
  ManufacturedCase c;
  c.name = "polynomial";
  c.materials.base = base;
  c.materials.base.k1 = 0.0;
  c.u = [](const Jet& x, const Jet& y) -> std::array<Jet, 2> {
    return {0.1 * (x * x + 0.5 * x * y - 0.3 * y * y) + 0.02, 0.1 * (-0.2 * x * x + x * y + 0.4 * y * y) - 0.01};
  };
  c.p = [](const Jet& x, const Jet& y) { return 0.3 + x - 0.5 * y + 0.2 * x * y; };
  return c;
}

/// unit_square_mesh(n) with cell k in region k % 2.
inline TriMesh two_region_square(int n) {
  const TriMesh m = unit_square_mesh(n);
  std::vector<Cell> cells = m.cells();
  for (std::size_t k = 0; k < cells.size(); ++k) cells[k].region = static_cast<int>(k % 2);
  return TriMesh(m.vertices(), cells, m.boundary_map());
}

inline ParameterSet other_region_params() {
  ParameterSet p;
  p.lambda = 3.0;
  p.mu = 0.5;
  p.alpha = 0.3;
  p.c0 = 0.02;
  p.k0 = 0.2;
  p.mu_f = 2.0;
  return p;
}

/// Mean normal traces of sigma and phi on edges, centroid values of u and p,
/// vertex values of rho; bubbles zero. Exact for the constant-state case.
inline Vector interpolate(const TriMesh& m, const SystemLayout& L, const ManufacturedCase& c) {
  Vector x = Vector::Zero(L.total());
  const Index ne = m.num_edges(), nc = m.num_cells();
  const EdgeRule& r = edge_quadrature(7);
  for (Index e = 0; e < ne; ++e) {
    const Edge& E = m.edge(e);
    const Vec2 a = m.vertex(E.v[0]), b = m.vertex(E.v[1]), n = m.edge_normal(e);
    const int region = m.cell(E.cells[0]).region;
    for (std::size_t q = 0; q < r.points.size(); ++q) {
      const ExactState s = c.eval(a + r.points[q] * (b - a), region);
      const Vec2 sn = s.sigma * n;
      x[L.begin(Field::Stress) + e] += r.weights[q] * sn.x();
      x[L.begin(Field::Stress) + ne + e] += r.weights[q] * sn.y();
      x[L.begin(Field::Flux) + e] += r.weights[q] * s.phi.dot(n);
    }
  }
  for (Index k = 0; k < nc; ++k) {
    const ExactState s = c.eval(m.centroid(k), m.cell(k).region);
    x[L.begin(Field::Displacement) + k] = s.u.x();
    x[L.begin(Field::Displacement) + nc + k] = s.u.y();
    x[L.begin(Field::Pressure) + k] = s.p;
  }
  for (Index v = 0; v < m.num_vertices(); ++v) x[L.begin(Field::Rotation) + v] = c.eval(m.vertex(v)).rho;
  return x;
}

inline Solution make_solution_from(const TriMesh& m, const Vector& x) {
  Solution s = make_solution(m);
  s.x = x;
  return s;
}

inline std::string temp_dir(const std::string& name) {
  const std::filesystem::path p = std::filesystem::path(POROFLOW_TEST_TMP) / name;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p.string();
}

}  // namespace support
