#pragma once

// Lowest-order (k = 0) reference elements and global DOF layouts:
//   stress       PEERS_0: two RT_0 rows plus one curl-bubble per row
//   displacement P_0 vector
//   rotation     continuous P_1 scalar (the [0][1] entry of a skew tensor)
//   flux         RT_0
//   pressure     P_0
//
// RT_0 functions are normalised so that psi_E . n_E = 1 on their own edge,
// hence div psi_E = |E| / |K| with the sign of the global edge orientation.

#include <array>
#include <string>
#include <vector>

#include "mesh.hpp"

namespace poroflow {

/// Affine data of one triangle: vertices, area, barycentric gradients and
/// the orientation sign of each local edge.
struct CellGeometry {
  std::array<Vec2, 3> x;
  double area = 0.0;
  std::array<Vec2, 3> grad_lambda;
  std::array<double, 3> edge_length{};
  std::array<double, 3> sign{1.0, 1.0, 1.0};

  CellGeometry(const Vec2& a, const Vec2& b, const Vec2& c, std::array<double, 3> signs = {1.0, 1.0, 1.0})
      : x{a, b, c}, sign(signs) {
    area = 0.5 * cross(b - a, c - a);
    if (!(area > 0.0)) throw MeshError("degenerate or clockwise cell");
    for (int j = 0; j < 3; ++j) {
      const Vec2 t = x[(j + 2) % 3] - x[(j + 1) % 3];  // edge opposite vertex j, CCW direction
      edge_length[j] = t.norm();
      grad_lambda[j] = Vec2(-t.y(), t.x()) / (2.0 * area);
    }
  }

  static CellGeometry of(const TriMesh& mesh, Index k) {
    return CellGeometry(mesh.cell_vertex(k, 0), mesh.cell_vertex(k, 1), mesh.cell_vertex(k, 2),
                        {mesh.edge_sign(k, 0), mesh.edge_sign(k, 1), mesh.edge_sign(k, 2)});
  }

  Vec2 map(const std::array<double, 3>& bary) const {
    return bary[0] * x[0] + bary[1] * x[1] + bary[2] * x[2];
  }

  std::array<double, 3> barycentric(const Vec2& p) const {
    std::array<double, 3> l;
    for (int j = 0; j < 3; ++j) l[j] = 1.0 / 3.0 + grad_lambda[j].dot(p - (x[0] + x[1] + x[2]) / 3.0);
    return l;
  }

  double diameter() const { return std::max({edge_length[0], edge_length[1], edge_length[2]}); }
};

struct Rt0Values {
  std::array<Vec2, 3> value;
  std::array<double, 3> div{};
  /// Gradient of psi_j is grad_scale[j] * I.
  std::array<double, 3> grad_scale{};
};

inline Rt0Values eval_rt0_basis(const CellGeometry& geo, const Vec2& p) {
  Rt0Values out;
  for (int j = 0; j < 3; ++j) {
    const double c = geo.sign[j] * geo.edge_length[j] / (2.0 * geo.area);
    out.value[j] = c * (p - geo.x[j]);
    out.div[j] = 2.0 * c;
    out.grad_scale[j] = c;
  }
  return out;
}

/// curl(b_K) with b_K = 27 l0 l1 l2 and its gradient (d value_a / d x_b).
struct BubbleValues {
  Vec2 value;
  Mat2 grad;
};

inline BubbleValues eval_bubble_basis(const CellGeometry& geo, const Vec2& p) {
  const auto l = geo.barycentric(p);
  const auto& g = geo.grad_lambda;
  const Vec2 db = 27.0 * (l[1] * l[2] * g[0] + l[0] * l[2] * g[1] + l[0] * l[1] * g[2]);
  Mat2 hess = Mat2::Zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) hess += 27.0 * l[3 - i - j] * g[i] * g[j].transpose();
  BubbleValues out;
  out.value = Vec2(db.y(), -db.x());
  out.grad.row(0) = hess.row(1);
  out.grad.row(1) = -hess.row(0);
  return out;
}

struct P1Values {
  std::array<double, 3> value{};
  std::array<Vec2, 3> grad;
};

inline P1Values eval_p1_basis(const CellGeometry& geo, const Vec2& p) {
  return {geo.barycentric(p), geo.grad_lambda};
}

inline double eval_p0_basis(const CellGeometry&) { return 1.0; }

enum class Field { Stress, Displacement, Rotation, Flux, Pressure };

inline const char* field_name(Field f) {
  switch (f) {
    case Field::Stress: return "sigma";
    case Field::Displacement: return "u";
    case Field::Rotation: return "rho";
    case Field::Flux: return "phi";
    case Field::Pressure: return "p";
  }
  return "?";
}

/// Degrees of freedom of one field. Indices are field-local; per-cell lists
/// are stored flat with stride dofs_per_cell.
///
/// Stress local order: row 0 edges (3), row 1 edges (3), row 0 bubble, row 1 bubble.
/// Displacement local order: component 0, component 1.
struct DofLayout {
  Field field = Field::Pressure;
  int degree = 0;
  Index size = 0;
  int dofs_per_cell = 0;
  std::vector<Index> cell_dofs;
  /// Orientation sign of each local DOF (edge DOFs of H(div) fields; 1 otherwise).
  std::vector<double> cell_signs;
  /// DOFs fixed by the Neumann trace (stress and flux only).
  std::vector<Index> neumann_dofs;

  const Index* dofs(Index k) const { return cell_dofs.data() + static_cast<std::size_t>(k) * dofs_per_cell; }
  const double* signs(Index k) const { return cell_signs.data() + static_cast<std::size_t>(k) * dofs_per_cell; }
};

inline DofLayout build_layout(const TriMesh& mesh, Field field, int degree = 0) {
  if (degree != 0) throw std::invalid_argument("build_layout: only degree 0 is implemented");
  const Index ne = mesh.num_edges(), nc = mesh.num_cells();
  DofLayout L;
  L.field = field;
  L.degree = degree;
  switch (field) {
    case Field::Stress: L.dofs_per_cell = 8; L.size = 2 * ne + 2 * nc; break;
    case Field::Displacement: L.dofs_per_cell = 2; L.size = 2 * nc; break;
    case Field::Rotation: L.dofs_per_cell = 3; L.size = mesh.num_vertices(); break;
    case Field::Flux: L.dofs_per_cell = 3; L.size = ne; break;
    case Field::Pressure: L.dofs_per_cell = 1; L.size = nc; break;
  }
  L.cell_dofs.resize(static_cast<std::size_t>(nc) * L.dofs_per_cell);
  L.cell_signs.assign(L.cell_dofs.size(), 1.0);
  for (Index k = 0; k < nc; ++k) {
    Index* d = L.cell_dofs.data() + static_cast<std::size_t>(k) * L.dofs_per_cell;
    double* sg = L.cell_signs.data() + static_cast<std::size_t>(k) * L.dofs_per_cell;
    const auto& ce = mesh.cell_edges(k);
    switch (field) {
      case Field::Stress:
        for (int r = 0; r < 2; ++r)
          for (int j = 0; j < 3; ++j) {
            d[3 * r + j] = r * ne + ce[j];
            sg[3 * r + j] = mesh.edge_sign(k, j);
          }
        d[6] = 2 * ne + k;
        d[7] = 2 * ne + nc + k;
        break;
      case Field::Displacement: d[0] = k; d[1] = nc + k; break;
      case Field::Rotation:
        for (int j = 0; j < 3; ++j) d[j] = mesh.cell(k).v[j];
        break;
      case Field::Flux:
        for (int j = 0; j < 3; ++j) {
          d[j] = ce[j];
          sg[j] = mesh.edge_sign(k, j);
        }
        break;
      case Field::Pressure: d[0] = k; break;
    }
  }
  if (field == Field::Stress || field == Field::Flux) {
    const int rows = field == Field::Stress ? 2 : 1;
    for (int r = 0; r < rows; ++r)
      for (Index e = 0; e < ne; ++e)
        if (mesh.edge(e).tag == BoundaryTag::GammaN) L.neumann_dofs.push_back(r * ne + e);
  }
  return L;
}

/// The five layouts of the coupled problem and their block offsets in the
/// global ordering (sigma, u, rho, phi, p).
struct SystemLayout {
  std::array<DofLayout, 5> fields;
  std::array<Index, 6> offset{};

  explicit SystemLayout(const TriMesh& mesh) {
    const Field order[5] = {Field::Stress, Field::Displacement, Field::Rotation, Field::Flux, Field::Pressure};
    for (int i = 0; i < 5; ++i) {
      fields[i] = build_layout(mesh, order[i]);
      offset[i + 1] = offset[i] + fields[i].size;
    }
  }

  const DofLayout& operator[](Field f) const { return fields[static_cast<int>(f)]; }
  Index begin(Field f) const { return offset[static_cast<int>(f)]; }
  Index size(Field f) const { return fields[static_cast<int>(f)].size; }
  Index total() const { return offset[5]; }
};

}  // namespace poroflow
