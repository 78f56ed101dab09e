#pragma once

// Nonlinear solvers: the decoupled fixed-point map (elasticity with frozen
// pressure, then Darcy with frozen stress and pressure) and monolithic Newton.

#include <memory>
#include <sstream>

#include "assembly.hpp"

namespace poroflow {

enum class SolverMethod { Picard, Newton };

struct SolverConfig {
  SolverMethod method = SolverMethod::Newton;
  double tol = 1e-7;
  int max_iterations = 25;

  void validate() const {
    if (!(tol > 0.0)) throw std::invalid_argument("SolverConfig: tolerance must be > 0");
    if (max_iterations < 1) throw std::invalid_argument("SolverConfig: max iterations must be >= 1");
  }
};

struct SolveReport {
  SolverMethod method = SolverMethod::Newton;
  int iterations = 0;
  /// Newton: l2 residual norms; Picard: L2 pressure updates.
  std::vector<double> history;
};

struct Solution {
  std::shared_ptr<const TriMesh> mesh;
  std::shared_ptr<const SystemLayout> layout;
  Vector x;
  SolveReport report;

  auto field(Field f) const { return x.segment(layout->begin(f), layout->size(f)); }
  auto sigma() const { return field(Field::Stress); }
  auto u() const { return field(Field::Displacement); }
  auto rho() const { return field(Field::Rotation); }
  auto phi() const { return field(Field::Flux); }
  auto p() const { return field(Field::Pressure); }
  Index dofs() const { return layout->total(); }
};

inline Solution make_solution(const TriMesh& mesh) {
  Solution s;
  s.mesh = std::make_shared<const TriMesh>(mesh);
  s.layout = std::make_shared<const SystemLayout>(*s.mesh);
  s.x = Vector::Zero(s.layout->total());
  return s;
}

/// L2 norm of a P0 field.
inline double p0_norm(const TriMesh& mesh, const Vector& v) {
  double s = 0.0;
  for (Index k = 0; k < mesh.num_cells(); ++k) s += mesh.area(k) * v[k] * v[k];
  return std::sqrt(s);
}

namespace detail {

/// Restricts essential data to a sub-block starting at `begin` of length `n`.
inline EssentialBC restrict_bc(const EssentialBC& bc, Index begin, Index n) {
  EssentialBC out;
  for (std::size_t i = 0; i < bc.dofs.size(); ++i)
    if (bc.dofs[i] >= begin && bc.dofs[i] < begin + n) {
      out.dofs.push_back(bc.dofs[i] - begin);
      out.values.push_back(bc.values[i]);
    }
  return out;
}

inline SparseMatrix stack_blocks(Index n, const std::vector<std::tuple<const SparseMatrix*, Index, Index, double>>& blocks) {
  Triplets t;
  for (const auto& [m, r0, c0, s] : blocks)
    for (int col = 0; col < m->outerSize(); ++col)
      for (SparseMatrix::InnerIterator it(*m, col); it; ++it)
        t.emplace_back(r0 + static_cast<Index>(it.row()), c0 + static_cast<Index>(it.col()), s * it.value());
  return from_triplets(n, n, t);
}

}  // namespace detail

/// The two sub-problems of the fixed-point map on one mesh. The elasticity
/// operator does not depend on the iterate and is factorised once.
class SplitSolver {
 public:
  SplitSolver(const TriMesh& mesh, const SystemLayout& layout, const ManufacturedCase& c)
      : mesh_(mesh), L_(layout), case_(c) {
    const Materials& mat = c.materials;
    nS_ = L_.size(Field::Stress);
    nU_ = L_.size(Field::Displacement);
    nR_ = L_.size(Field::Rotation);
    nF_ = L_.size(Field::Flux);
    nP_ = L_.size(Field::Pressure);
    A_ = assemble_a(mesh, L_, mat);
    B_ = assemble_b(mesh, L_);
    C_ = assemble_c(mesh, L_, mat);
    Bt_ = assemble_b_tilde(mesh, L_);
    Ct_ = assemble_c_tilde(mesh, L_, mat);
    rhs_ = assemble_rhs(mesh, L_, c);
    bc_ = essential_values(mesh, L_, c);

    SparseSystem el;
    const SparseMatrix BuT = B_.u.transpose(), BrT = B_.rho.transpose();
    el.matrix = detail::stack_blocks(nS_ + nU_ + nR_, {{&A_, 0, 0, 1.0},
                                                      {&BuT, 0, nS_, 1.0},
                                                      {&BrT, 0, nS_ + nU_, 1.0},
                                                      {&B_.u, nS_, 0, 1.0},
                                                      {&B_.rho, nS_ + nU_, 0, 1.0}});
    el.rhs = Vector::Zero(nS_ + nU_ + nR_);
    el.essential = detail::restrict_bc(bc_, L_.begin(Field::Stress), nS_);
    apply_essential_bc(el);
    elasticity_matrix_ = el.matrix;
    elasticity_lu_.factorize(el.matrix);
  }

  /// (sigma, u, rho) for the frozen pressure p_hat, written into `x`.
  void solve_elasticity(const Vector& p_hat, Vector& x) const {
    Vector b = Vector::Zero(nS_ + nU_ + nR_);
    b.head(nS_) = rhs_.H - C_.transpose() * p_hat;
    b.segment(nS_, nU_) = rhs_.F;
    const EssentialBC bc = detail::restrict_bc(bc_, L_.begin(Field::Stress), nS_);
    lift(b, bc);
    const Vector y = elasticity_lu_.solve(b);
    x.segment(L_.begin(Field::Stress), nS_ + nU_ + nR_) = y;
  }

  /// (phi, p) with kappa frozen at the stress of `x` and pressure p_hat.
  void solve_darcy(const Vector& p_hat, Vector& x) const {
    Vector frozen = x;
    frozen.segment(L_.begin(Field::Pressure), nP_) = p_hat;
    const SparseMatrix At = assemble_a_tilde(mesh_, L_, case_.materials, frozen);
    const SparseMatrix BtT = Bt_.transpose();
    SparseSystem d;
    d.matrix = detail::stack_blocks(nF_ + nP_, {{&At, 0, 0, 1.0},
                                               {&BtT, 0, nF_, 1.0},
                                               {&Bt_, nF_, 0, 1.0},
                                               {&Ct_, nF_, nF_, -1.0}});
    d.rhs = Vector::Zero(nF_ + nP_);
    d.rhs.head(nF_) = rhs_.H_tilde;
    d.rhs.tail(nP_) = rhs_.F_tilde + C_ * x.segment(L_.begin(Field::Stress), nS_);
    d.essential = detail::restrict_bc(bc_, L_.begin(Field::Flux), nF_);
    apply_essential_bc(d);
    x.segment(L_.begin(Field::Flux), nF_ + nP_) = SparseLU(d.matrix).solve(d.rhs);
  }

  const SparseMatrix& elasticity_matrix() const { return elasticity_matrix_; }

 private:
  // Moves prescribed stress values to the right-hand side of the eliminated
  // elasticity system.
  void lift(Vector& b, const EssentialBC& bc) const {
    Vector g = Vector::Zero(b.size());
    std::vector<char> fixed(b.size(), 0);
    for (std::size_t i = 0; i < bc.dofs.size(); ++i) {
      g[bc.dofs[i]] = bc.values[i];
      fixed[bc.dofs[i]] = 1;
    }
    Vector ag = Vector::Zero(b.size());
    ag.head(nS_) = A_ * g.head(nS_);
    ag.segment(nS_, nU_) = B_.u * g.head(nS_);
    ag.segment(nS_ + nU_, nR_) = B_.rho * g.head(nS_);
    b -= ag;
    for (Index i = 0; i < b.size(); ++i)
      if (fixed[i]) b[i] = g[i];
  }

  const TriMesh& mesh_;
  const SystemLayout& L_;
  const ManufacturedCase& case_;
  Index nS_ = 0, nU_ = 0, nR_ = 0, nF_ = 0, nP_ = 0;
  SparseMatrix A_, C_, Bt_, Ct_;
  BBlocks B_;
  RhsVectors rhs_;
  EssentialBC bc_;
  SparseMatrix elasticity_matrix_;
  SparseLU elasticity_lu_;
};

/// Fixed-point iteration p <- T(p) from p = 0. The iteration count is the
/// number of updates that moved p by more than the tolerance.
inline Solution picard_solve(const TriMesh& mesh, const ManufacturedCase& c, const SolverConfig& cfg = {}) {
  cfg.validate();
  Solution sol = make_solution(mesh);
  sol.report.method = SolverMethod::Picard;
  const SystemLayout& L = *sol.layout;
  const SplitSolver split(*sol.mesh, L, c);
  const Index oP = L.begin(Field::Pressure), nP = L.size(Field::Pressure);

  Vector p_hat = Vector::Zero(nP);
  for (int it = 1; it <= cfg.max_iterations + 1; ++it) {
    split.solve_elasticity(p_hat, sol.x);
    split.solve_darcy(p_hat, sol.x);
    const Vector p = sol.x.segment(oP, nP);
    const double change = p0_norm(mesh, p - p_hat);
    sol.report.history.push_back(change);
    if (change <= cfg.tol * std::max(1.0, p0_norm(mesh, p))) {
      sol.report.iterations = std::max(1, it - 1);
      return sol;
    }
    p_hat = p;
  }
  std::ostringstream msg;
  msg << "Picard iteration did not converge in " << cfg.max_iterations << " iterations (last update "
      << sol.report.history.back() << ")";
  throw SolverError(msg.str(), sol.report.history);
}

/// Elasticity sub-solve for a given pressure: returns a global vector with
/// (sigma, u, rho) filled.
inline Vector solve_elasticity(const TriMesh& mesh, const ManufacturedCase& c, const Vector& p_hat) {
  const SystemLayout L(mesh);
  Vector x = Vector::Zero(L.total());
  SplitSolver(mesh, L, c).solve_elasticity(p_hat, x);
  return x;
}

/// Darcy sub-solve with kappa frozen at the stress part of `state` and p_hat;
/// returns `state` with (phi, p) replaced.
inline Vector solve_darcy(const TriMesh& mesh, const ManufacturedCase& c, const Vector& state, const Vector& p_hat) {
  const SystemLayout L(mesh);
  Vector x = state;
  SplitSolver(mesh, L, c).solve_darcy(p_hat, x);
  return x;
}

/// Monolithic Newton from zero (prescribed DOFs set), stopping when the l2
/// residual over free DOFs is <= tol * max(1, initial residual).
inline Solution newton_solve(const TriMesh& mesh, const ManufacturedCase& c, const SolverConfig& cfg = {}) {
  cfg.validate();
  Solution sol = make_solution(mesh);
  sol.report.method = SolverMethod::Newton;
  const SystemLayout& L = *sol.layout;
  const EssentialBC bc = essential_values(*sol.mesh, L, c);
  for (std::size_t i = 0; i < bc.dofs.size(); ++i) sol.x[bc.dofs[i]] = bc.values[i];

  double r0 = -1.0;
  for (int it = 0;; ++it) {
    SparseSystem sys = assemble_monolithic(*sol.mesh, L, c, sol.x, Linearisation::Newton);
    const double r = sys.rhs.norm();
    sol.report.history.push_back(r);
    if (r0 < 0.0) r0 = r;
    if (r <= cfg.tol * std::max(1.0, r0)) {
      sol.report.iterations = it;
      return sol;
    }
    if (it == cfg.max_iterations) break;
    apply_essential_bc(sys);
    sol.x += SparseLU(sys.matrix).solve(sys.rhs);
  }
  std::ostringstream msg;
  msg << "Newton did not converge in " << cfg.max_iterations << " iterations (residual "
      << sol.report.history.back() << ", initial " << r0 << ")";
  throw SolverError(msg.str(), sol.report.history);
}

inline Solution solve(const TriMesh& mesh, const ManufacturedCase& c, const SolverConfig& cfg = {}) {
  return cfg.method == SolverMethod::Picard ? picard_solve(mesh, c, cfg) : newton_solve(mesh, c, cfg);
}

}  // namespace poroflow
