#pragma once

// Element and global assembly of the coupled mixed system.
//
// Global unknown ordering is (sigma, u, rho, phi, p). The flux and pressure
// equations are both multiplied by -1 so the frozen-coefficient matrix is
// symmetric:
//
//   [ A    Bu^T  Br^T   0     C^T  ] [sigma]   [  H  ]
//   [ Bu   0     0      0     0    ] [u    ]   [  F  ]
//   [ Br   0     0      0     0    ] [rho  ] = [  0  ]
//   [ 0    0     0     -At   -Bt^T ] [phi  ]   [ -Ht ]
//   [ C    0     0     -Bt    Ct   ] [p    ]   [ -Ft ]

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "cases.hpp"
#include "fields.hpp"
#include "linear_solver.hpp"
#include "quadrature.hpp"

namespace poroflow {

/// Quadrature degrees of the bilinear forms and load functionals.
inline constexpr int kFormDegree = 4;
inline constexpr int kFormDegreeExp = 6;
inline constexpr int kEdgeDegree = 6;

inline int a_tilde_degree(const ParameterSet& prm) {
  return prm.law == PermeabilityLaw::Exponential ? kFormDegreeExp : kFormDegree;
}

using Triplets = std::vector<Eigen::Triplet<double, int>>;

using Mat8 = Eigen::Matrix<double, 8, 8>;
using Mat28 = Eigen::Matrix<double, 2, 8>;
using Mat38 = Eigen::Matrix<double, 3, 8>;
using Row8 = Eigen::Matrix<double, 1, 8>;
using Row3 = Eigen::Matrix<double, 1, 3>;

// ---------------------------------------------------------------- local blocks

inline Mat8 local_a(const CellGeometry& geo, const ParameterSet& prm, int degree = kFormDegree) {
  const QuadratureRule& rule = quadrature(degree);
  Mat8 m = Mat8::Zero();
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Vec2 x = geo.map(rule.points[q]);
    const double w = rule.weights[q] * 2.0 * geo.area;
    const StressBasis s = eval_stress_basis(geo, x);
    std::array<Mat2, 8> cs;
    for (int i = 0; i < 8; ++i) cs[i] = hooke_inv(s.value[i], prm);
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) m(i, j) += w * cs[j].cwiseProduct(s.value[i]).sum();
  }
  return m;
}

/// Rows: displacement components; columns: stress basis.
inline Mat28 local_b_u(const CellGeometry& geo) {
  const StressBasis s = eval_stress_basis(geo, (geo.x[0] + geo.x[1] + geo.x[2]) / 3.0);
  Mat28 m;
  for (int i = 0; i < 8; ++i) m.col(i) = geo.area * s.div[i];
  return m;
}

/// Rows: vertex hats (rotation); columns: stress basis. tau : eta with
/// eta = [[0, l], [-l, 0]].
inline Mat38 local_b_rho(const CellGeometry& geo, int degree = kFormDegree) {
  const QuadratureRule& rule = quadrature(degree);
  Mat38 m = Mat38::Zero();
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Vec2 x = geo.map(rule.points[q]);
    const double w = rule.weights[q] * 2.0 * geo.area;
    const StressBasis s = eval_stress_basis(geo, x);
    const auto& l = rule.points[q];
    for (int i = 0; i < 8; ++i) {
      const double skew = s.value[i](0, 1) - s.value[i](1, 0);
      for (int j = 0; j < 3; ++j) m(j, i) += w * l[j] * skew;
    }
  }
  return m;
}

inline Row8 local_c(const CellGeometry& geo, const ParameterSet& prm, int degree = kFormDegree) {
  const QuadratureRule& rule = quadrature(degree);
  Row8 m = Row8::Zero();
  const double scale = prm.alpha / prm.bulk();
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Vec2 x = geo.map(rule.points[q]);
    const double w = rule.weights[q] * 2.0 * geo.area;
    const StressBasis s = eval_stress_basis(geo, x);
    for (int i = 0; i < 8; ++i) m(i) += w * scale * s.value[i].trace();
  }
  return m;
}

/// int kappa^{-1}(tr sigma_hat, p_hat) phi . psi on one cell.
inline Eigen::Matrix3d local_a_tilde(const CellFields& state, const ParameterSet& prm, int degree) {
  const CellGeometry& geo = state.geometry();
  const QuadratureRule& rule = quadrature(degree);
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Vec2 x = geo.map(rule.points[q]);
    const double w = rule.weights[q] * 2.0 * geo.area;
    const double kinv = kappa_inv(state.tr_sigma(x), state.pressure(), prm);
    const Rt0Values rt = eval_rt0_basis(geo, x);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m(i, j) += w * kinv * rt.value[i].dot(rt.value[j]);
  }
  return m;
}

/// Derivative of the a_tilde action at phi_h with respect to the stress and
/// pressure coefficients: rows flux basis, columns stress basis / pressure.
struct LocalATildeDerivative {
  Mat38 d_sigma = Mat38::Zero();
  Eigen::Vector3d d_p = Eigen::Vector3d::Zero();
};

inline LocalATildeDerivative local_a_tilde_derivative(const CellFields& state, const ParameterSet& prm,
                                                      int degree) {
  const CellGeometry& geo = state.geometry();
  const QuadratureRule& rule = quadrature(degree);
  LocalATildeDerivative out;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Vec2 x = geo.map(rule.points[q]);
    const double w = rule.weights[q] * 2.0 * geo.area;
    const KappaValue kinv = kappa_inv_with_derivatives(state.tr_sigma(x), state.pressure(), prm);
    const Rt0Values rt = eval_rt0_basis(geo, x);
    const StressBasis s = eval_stress_basis(geo, x);
    const Vec2 phi = state.phi(x);
    for (int i = 0; i < 3; ++i) {
      const double proj = phi.dot(rt.value[i]);
      for (int j = 0; j < 8; ++j) out.d_sigma(i, j) += w * kinv.d_tr_sigma * s.value[j].trace() * proj;
      out.d_p(i) += w * kinv.d_p * proj;
    }
  }
  return out;
}

/// Row: pressure indicator; columns: flux basis.
inline Row3 local_b_tilde(const CellGeometry& geo) {
  const Rt0Values rt = eval_rt0_basis(geo, geo.x[0]);
  Row3 m;
  for (int j = 0; j < 3; ++j) m(j) = geo.area * rt.div[j];
  return m;
}

inline double local_c_tilde(const CellGeometry& geo, const ParameterSet& prm) {
  return gamma_tilde(prm) * geo.area;
}

// --------------------------------------------------------------- global blocks

namespace detail {

template <typename M>
void scatter(Triplets& t, const M& local, const Index* rows, const Index* cols, Index row0 = 0, Index col0 = 0,
             double scale = 1.0) {
  for (int i = 0; i < local.rows(); ++i)
    for (int j = 0; j < local.cols(); ++j)
      if (local(i, j) != 0.0) t.emplace_back(row0 + rows[i], col0 + cols[j], scale * local(i, j));
}

inline SparseMatrix from_triplets(Index rows, Index cols, const Triplets& t) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

inline const ParameterSet& cell_params(const TriMesh& mesh, const Materials& mat, Index k) {
  return mat.at(mesh.cell(k).region);
}

}  // namespace detail

inline SparseMatrix assemble_a(const TriMesh& mesh, const SystemLayout& L, const Materials& mat) {
  Triplets t;
  const DofLayout& S = L[Field::Stress];
  for (Index k = 0; k < mesh.num_cells(); ++k)
    detail::scatter(t, local_a(CellGeometry::of(mesh, k), detail::cell_params(mesh, mat, k)), S.dofs(k), S.dofs(k));
  return detail::from_triplets(S.size, S.size, t);
}

struct BBlocks {
  SparseMatrix u;    // (displacement x stress)
  SparseMatrix rho;  // (rotation x stress)
};

inline BBlocks assemble_b(const TriMesh& mesh, const SystemLayout& L, int degree = kFormDegree) {
  Triplets tu, tr;
  const DofLayout& S = L[Field::Stress];
  for (Index k = 0; k < mesh.num_cells(); ++k) {
    const CellGeometry geo = CellGeometry::of(mesh, k);
    detail::scatter(tu, local_b_u(geo), L[Field::Displacement].dofs(k), S.dofs(k));
    detail::scatter(tr, local_b_rho(geo, degree), L[Field::Rotation].dofs(k), S.dofs(k));
  }
  return {detail::from_triplets(L.size(Field::Displacement), S.size, tu),
          detail::from_triplets(L.size(Field::Rotation), S.size, tr)};
}

/// (pressure x stress)
inline SparseMatrix assemble_c(const TriMesh& mesh, const SystemLayout& L, const Materials& mat) {
  Triplets t;
  for (Index k = 0; k < mesh.num_cells(); ++k)
    detail::scatter(t, local_c(CellGeometry::of(mesh, k), detail::cell_params(mesh, mat, k)),
                    L[Field::Pressure].dofs(k), L[Field::Stress].dofs(k));
  return detail::from_triplets(L.size(Field::Pressure), L.size(Field::Stress), t);
}

/// kappa^{-1} is evaluated from the stress and pressure parts of the global
/// iterate `state`.
inline SparseMatrix assemble_a_tilde(const TriMesh& mesh, const SystemLayout& L, const Materials& mat,
                                     const Vector& state) {
  Triplets t;
  const DofLayout& P = L[Field::Flux];
  for (Index k = 0; k < mesh.num_cells(); ++k) {
    const ParameterSet& prm = detail::cell_params(mesh, mat, k);
    const CellFields cf(mesh, L, state, k);
    Eigen::Matrix3d m;
    try {
      m = local_a_tilde(cf, prm, a_tilde_degree(prm));
    } catch (const PhysicsError& e) {
      throw PhysicsError(std::string(e.what()) + " in cell " + std::to_string(k));
    }
    detail::scatter(t, m, P.dofs(k), P.dofs(k));
  }
  return detail::from_triplets(P.size, P.size, t);
}

/// (pressure x flux)
inline SparseMatrix assemble_b_tilde(const TriMesh& mesh, const SystemLayout& L) {
  Triplets t;
  for (Index k = 0; k < mesh.num_cells(); ++k)
    detail::scatter(t, local_b_tilde(CellGeometry::of(mesh, k)), L[Field::Pressure].dofs(k), L[Field::Flux].dofs(k));
  return detail::from_triplets(L.size(Field::Pressure), L.size(Field::Flux), t);
}

inline SparseMatrix assemble_c_tilde(const TriMesh& mesh, const SystemLayout& L, const Materials& mat) {
  Triplets t;
  for (Index k = 0; k < mesh.num_cells(); ++k)
    t.emplace_back(k, k, local_c_tilde(CellGeometry::of(mesh, k), detail::cell_params(mesh, mat, k)));
  return detail::from_triplets(L.size(Field::Pressure), L.size(Field::Pressure), t);
}

// -------------------------------------------------------------- load vectors

struct RhsVectors {
  Vector H;        // stress
  Vector F;        // displacement
  Vector H_tilde;  // flux
  Vector F_tilde;  // pressure
};

inline RhsVectors assemble_rhs(const TriMesh& mesh, const SystemLayout& L, const ManufacturedCase& c) {
  RhsVectors r;
  r.H = Vector::Zero(L.size(Field::Stress));
  r.F = Vector::Zero(L.size(Field::Displacement));
  r.H_tilde = Vector::Zero(L.size(Field::Flux));
  r.F_tilde = Vector::Zero(L.size(Field::Pressure));
  const Index ne = mesh.num_edges(), nc = mesh.num_cells();

  const QuadratureRule& rule = quadrature(kFormDegree);
  for (Index k = 0; k < nc; ++k) {
    const CellGeometry geo = CellGeometry::of(mesh, k);
    const int region = mesh.cell(k).region;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double w = rule.weights[q] * 2.0 * geo.area;
      const ExactState s = c.eval(geo.map(rule.points[q]), region);
      r.F[k] -= w * s.f.x();
      r.F[nc + k] -= w * s.f.y();
      r.F_tilde[k] -= w * s.g;
    }
  }

  // The global RT basis function of a boundary edge has unit outward flux.
  const EdgeRule& er = edge_quadrature(kEdgeDegree);
  for (Index e = 0; e < ne; ++e) {
    if (mesh.edge(e).tag != BoundaryTag::GammaD) continue;
    const Vec2 a = mesh.vertex(mesh.edge(e).v[0]), b = mesh.vertex(mesh.edge(e).v[1]);
    const double len = mesh.edge_length(e);
    for (std::size_t q = 0; q < er.points.size(); ++q) {
      const Vec2 x = a + er.points[q] * (b - a);
      const double w = er.weights[q] * len;
      const Vec2 uD = c.displacement(x);
      r.H[e] += w * uD.x();
      r.H[ne + e] += w * uD.y();
      r.H_tilde[e] += w * c.pressure(x);
    }
  }
  return r;
}

// ------------------------------------------------------- essential conditions

/// Prescribed global DOFs.
struct EssentialBC {
  std::vector<Index> dofs;
  std::vector<double> values;
};

/// Neumann-boundary stress and flux DOFs: mean normal traces of the exact fields.
inline EssentialBC essential_values(const TriMesh& mesh, const SystemLayout& L, const ManufacturedCase& c) {
  EssentialBC bc;
  const Index ne = mesh.num_edges();
  const EdgeRule& er = edge_quadrature(kEdgeDegree);
  std::vector<double> flux_row0(ne), flux_row1(ne), flux(ne);
  for (Index e = 0; e < ne; ++e) {
    const Edge& E = mesh.edge(e);
    if (E.tag != BoundaryTag::GammaN) continue;
    const Vec2 a = mesh.vertex(E.v[0]), b = mesh.vertex(E.v[1]);
    const Vec2 n = mesh.edge_normal(e);
    const int region = mesh.cell(E.cells[0]).region;
    Vec2 sn = Vec2::Zero();
    double fn = 0.0;
    for (std::size_t q = 0; q < er.points.size(); ++q) {
      const ExactState s = c.eval(a + er.points[q] * (b - a), region);
      sn += er.weights[q] * (s.sigma * n);
      fn += er.weights[q] * s.phi.dot(n);
    }
    flux_row0[e] = sn.x();
    flux_row1[e] = sn.y();
    flux[e] = fn;
  }
  for (Index d : L[Field::Stress].neumann_dofs) {
    bc.dofs.push_back(L.begin(Field::Stress) + d);
    bc.values.push_back(d < ne ? flux_row0[d] : flux_row1[d - ne]);
  }
  for (Index d : L[Field::Flux].neumann_dofs) {
    bc.dofs.push_back(L.begin(Field::Flux) + d);
    bc.values.push_back(flux[d]);
  }
  return bc;
}

struct SparseSystem {
  SparseMatrix matrix;
  Vector rhs;
  std::array<Index, 6> offsets{};
  EssentialBC essential;
  bool eliminated = false;
};

/// Symmetric elimination: prescribed columns move to the right-hand side,
/// prescribed rows and columns become identity.
inline void apply_essential_bc(SparseSystem& sys) {
  const Index n = static_cast<Index>(sys.matrix.rows());
  std::vector<char> fixed(n, 0);
  Vector value = Vector::Zero(n);
  for (std::size_t i = 0; i < sys.essential.dofs.size(); ++i) {
    fixed[sys.essential.dofs[i]] = 1;
    value[sys.essential.dofs[i]] = sys.essential.values[i];
  }
  sys.matrix.makeCompressed();
  for (Index col = 0; col < n; ++col)
    for (SparseMatrix::InnerIterator it(sys.matrix, col); it; ++it) {
      const Index row = static_cast<Index>(it.row());
      if (fixed[col] && !fixed[row]) sys.rhs[row] -= it.value() * value[col];
      if (fixed[col] || fixed[row]) it.valueRef() = 0.0;
    }
  sys.matrix.prune([&](Index row, Index col, double) { return !(fixed[row] || fixed[col]); });
  Triplets diag;
  for (Index i = 0; i < n; ++i)
    if (fixed[i]) {
      diag.emplace_back(i, i, 1.0);
      sys.rhs[i] = value[i];
    }
  SparseMatrix id(n, n);
  id.setFromTriplets(diag.begin(), diag.end());
  sys.matrix += id;
  sys.eliminated = true;
}

// ------------------------------------------------------------ monolithic

enum class Linearisation { Picard, Newton };

/// Assembles the coupled system at the iterate `state`.
///
/// Picard: matrix with kappa frozen at `state`, load vector, prescribed values.
/// Newton: the Jacobian at `state`, right-hand side -R(state) and zero
/// prescribed increments; `state` must already carry the prescribed values.
/// Essential conditions are recorded but not applied.
inline SparseSystem assemble_monolithic(const TriMesh& mesh, const SystemLayout& L, const ManufacturedCase& c,
                                        const Vector& state, Linearisation mode) {
  const Materials& mat = c.materials;
  const Index oS = L.begin(Field::Stress), oU = L.begin(Field::Displacement), oR = L.begin(Field::Rotation),
              oF = L.begin(Field::Flux), oP = L.begin(Field::Pressure);
  Triplets t;
  t.reserve(static_cast<std::size_t>(mesh.num_cells()) * 150);
  std::vector<LocalATildeDerivative> derivatives(mode == Linearisation::Newton ? mesh.num_cells() : 0);
  for (Index k = 0; k < mesh.num_cells(); ++k) {
    const ParameterSet& prm = detail::cell_params(mesh, mat, k);
    const CellGeometry geo = CellGeometry::of(mesh, k);
    const Index* dS = L[Field::Stress].dofs(k);
    const Index* dU = L[Field::Displacement].dofs(k);
    const Index* dR = L[Field::Rotation].dofs(k);
    const Index* dF = L[Field::Flux].dofs(k);
    const Index* dP = L[Field::Pressure].dofs(k);

    const Mat8 a = local_a(geo, prm);
    const Mat28 bu = local_b_u(geo);
    const Mat38 br = local_b_rho(geo);
    const Row8 cc = local_c(geo, prm);
    const Row3 bt = local_b_tilde(geo);
    const CellFields cf(mesh, L, state, k);
    Eigen::Matrix3d at;
    try {
      at = local_a_tilde(cf, prm, a_tilde_degree(prm));
      if (mode == Linearisation::Newton) derivatives[k] = local_a_tilde_derivative(cf, prm, a_tilde_degree(prm));
    } catch (const PhysicsError& e) {
      throw PhysicsError(std::string(e.what()) + " in cell " + std::to_string(k));
    }

    detail::scatter(t, a, dS, dS, oS, oS);
    detail::scatter(t, bu, dU, dS, oU, oS);
    detail::scatter(t, Eigen::MatrixXd(bu.transpose()), dS, dU, oS, oU);
    detail::scatter(t, br, dR, dS, oR, oS);
    detail::scatter(t, Eigen::MatrixXd(br.transpose()), dS, dR, oS, oR);
    detail::scatter(t, cc, dP, dS, oP, oS);
    detail::scatter(t, Eigen::MatrixXd(cc.transpose()), dS, dP, oS, oP);
    detail::scatter(t, at, dF, dF, oF, oF, -1.0);
    detail::scatter(t, bt, dP, dF, oP, oF, -1.0);
    detail::scatter(t, Eigen::MatrixXd(bt.transpose()), dF, dP, oF, oP, -1.0);
    t.emplace_back(oP + dP[0], oP + dP[0], local_c_tilde(geo, prm));
    if (mode == Linearisation::Newton) {
      detail::scatter(t, derivatives[k].d_sigma, dF, dS, oF, oS, -1.0);
      detail::scatter(t, derivatives[k].d_p, dF, dP, oF, oP, -1.0);
    }
  }

  SparseSystem sys;
  sys.offsets = L.offset;
  sys.matrix = detail::from_triplets(L.total(), L.total(), t);

  const RhsVectors r = assemble_rhs(mesh, L, c);
  Vector b = Vector::Zero(L.total());
  b.segment(oS, r.H.size()) = r.H;
  b.segment(oU, r.F.size()) = r.F;
  b.segment(oF, r.H_tilde.size()) = -r.H_tilde;
  b.segment(oP, r.F_tilde.size()) = -r.F_tilde;
  sys.essential = essential_values(mesh, L, c);

  if (mode == Linearisation::Picard) {
    sys.rhs = b;
    return sys;
  }
  // K(state) state = J state + (kappa derivative terms) state.
  Vector kx = sys.matrix * state;
  for (Index k = 0; k < mesh.num_cells(); ++k) {
    const LocalATildeDerivative& dat = derivatives[k];
    const Index* dS = L[Field::Stress].dofs(k);
    const Index* dF = L[Field::Flux].dofs(k);
    const Index* dP = L[Field::Pressure].dofs(k);
    for (int i = 0; i < 3; ++i) {
      double extra = dat.d_p(i) * state[oP + dP[0]];
      for (int j = 0; j < 8; ++j) extra += dat.d_sigma(i, j) * state[oS + dS[j]];
      kx[oF + dF[i]] += extra;
    }
  }
  sys.rhs = b - kx;
  for (double& v : sys.essential.values) v = 0.0;
  for (Index d : sys.essential.dofs) sys.rhs[d] = 0.0;
  return sys;
}

/// Residual K(state) state - b of the coupled system, zero on prescribed DOFs.
inline Vector monolithic_residual(const TriMesh& mesh, const SystemLayout& L, const ManufacturedCase& c,
                                  const Vector& state) {
  SparseSystem sys = assemble_monolithic(mesh, L, c, state, Linearisation::Picard);
  Vector r = sys.matrix * state - sys.rhs;
  for (Index d : sys.essential.dofs) r[d] = 0.0;
  return r;
}

}  // namespace poroflow
