#pragma once

// Residual a posteriori indicators for the solid and fluid sub-problems and
// bulk marking.

#include <algorithm>
#include <numeric>

#include "postproc.hpp"

namespace poroflow {

inline constexpr int kEstimatorDegree = kErrorDegree;

struct EstimatorReport {
  /// Per-cell squared terms. Solid: equilibrium, asymmetry, constitutive,
  /// curl, Dirichlet trace, interior jump, Dirichlet tangential.
  std::vector<std::array<double, 7>> solid_terms;
  /// Fluid: mass, Darcy, rot, interior jump, Dirichlet tangential, Dirichlet trace.
  std::vector<std::array<double, 6>> fluid_terms;
  std::vector<double> xi_s2, xi_f2, xi2;
  double xi = 0.0;
};

namespace detail {

/// C^{-1} sigma_h + alpha/(d lambda + 2 mu) p_h I + rho_h: the discrete
/// approximation of grad u.
inline Mat2 displacement_gradient(const DiscretePoint& dp, const ParameterSet& prm) {
  return hooke_inv(dp.sigma, prm) + prm.alpha / prm.bulk() * dp.p * Mat2::Identity() + skew_tensor(dp.rho);
}

/// Row-wise rot of displacement_gradient: rot(v) = d v_1/dx - d v_0/dy.
inline Vec2 displacement_gradient_curl(const DiscretePoint& dp, const ParameterSet& prm) {
  const double shear = 1.0 / (2.0 * prm.mu);
  const double vol = prm.lambda / (2.0 * prm.mu * prm.bulk());
  const Vec2 grad_tr = dp.grad_sigma_row[0].row(0).transpose() + dp.grad_sigma_row[1].row(1).transpose();
  Vec2 out;
  for (int r = 0; r < 2; ++r) {
    const Mat2& g = dp.grad_sigma_row[r];
    out[r] = shear * (g(1, 0) - g(0, 1));
  }
  // -vol * tr(sigma) I: row 0 is (-vol tr, 0), row 1 is (0, -vol tr).
  out[0] += vol * grad_tr.y();
  out[1] -= vol * grad_tr.x();
  // skew(rho): row 0 is (0, rho), row 1 is (-rho, 0).
  out[0] += dp.grad_rho.x();
  out[1] += dp.grad_rho.y();
  return out;
}

inline KappaValue discrete_kappa_inv(const DiscretePoint& dp, const ParameterSet& prm) {
  return kappa_inv_with_derivatives(dp.sigma.trace(), dp.p, prm);
}

}  // namespace detail

inline EstimatorReport estimate(const Solution& sol, const ManufacturedCase& c, int degree = kEstimatorDegree) {
  const TriMesh& mesh = *sol.mesh;
  const SystemLayout& L = *sol.layout;
  const Index nc = mesh.num_cells();
  EstimatorReport rep;
  rep.solid_terms.assign(nc, {});
  rep.fluid_terms.assign(nc, {});

  std::vector<CellFields> cells;
  cells.reserve(nc);
  for (Index k = 0; k < nc; ++k) cells.emplace_back(mesh, L, sol.x, k);

  QuadratureRule storage;
  for (Index k = 0; k < nc; ++k) {
    const CellFields& cf = cells[k];
    const CellGeometry& geo = cf.geometry();
    const int region = mesh.cell(k).region;
    const ParameterSet& prm = c.materials.at(region);
    const double h2 = geo.diameter() * geo.diameter();
    const QuadratureRule& rule = detail::cell_rule(mesh, k, degree, c.singular_point, storage);
    auto& s = rep.solid_terms[k];
    auto& f = rep.fluid_terms[k];
    try {
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const Vec2 x = geo.map(rule.points[q]);
        const double w = rule.weights[q] * 2.0 * geo.area;
        const ExactState ex = c.eval(x, region);
        const DiscretePoint dp = cf.at(x);
        const Mat2 grad_u = detail::displacement_gradient(dp, prm);
        s[0] += w * (ex.f + dp.div_sigma).squaredNorm();
        s[1] += w * (dp.sigma - dp.sigma.transpose()).squaredNorm();
        s[2] += w * h2 * grad_u.squaredNorm();  // grad u_h = 0 for P0
        s[3] += w * h2 * detail::displacement_gradient_curl(dp, prm).squaredNorm();

        const KappaValue kinv = detail::discrete_kappa_inv(dp, prm);
        const double mass = gamma_tilde(prm) * dp.p + prm.alpha / prm.bulk() * dp.sigma.trace() - dp.div_phi - ex.g;
        f[0] += w * mass * mass;
        f[1] += w * h2 * (kinv.value * dp.phi).squaredNorm();  // grad p_h = 0 for P0
        // rot(k^{-1} phi) = k^{-1} rot(phi) + grad(k^{-1}) x phi; p_h is constant.
        const Vec2 grad_tr = dp.grad_sigma_row[0].row(0).transpose() + dp.grad_sigma_row[1].row(1).transpose();
        const Vec2 grad_kinv = kinv.d_tr_sigma * grad_tr;
        const double rot = kinv.value * (dp.grad_phi(1, 0) - dp.grad_phi(0, 1)) + grad_kinv.x() * dp.phi.y() -
                           grad_kinv.y() * dp.phi.x();
        f[2] += w * h2 * rot * rot;
      }
    } catch (const PhysicsError& e) {
      throw PhysicsError(std::string(e.what()) + " in cell " + std::to_string(k));
    }
  }

  const EdgeRule& er = edge_quadrature(kEdgeDegree);
  for (Index e = 0; e < mesh.num_edges(); ++e) {
    const Edge& E = mesh.edge(e);
    const Vec2 a = mesh.vertex(E.v[0]), b = mesh.vertex(E.v[1]);
    const double len = mesh.edge_length(e);
    const Vec2 t = mesh.edge_tangent(e);
    const Index k0 = E.cells[0];
    const ParameterSet& prm0 = c.materials.at(mesh.cell(k0).region);
    if (E.tag == BoundaryTag::GammaN) continue;
    if (E.tag == BoundaryTag::Interior) {
      const Index k1 = E.cells[1];
      const ParameterSet& prm1 = c.materials.at(mesh.cell(k1).region);
      double js = 0.0, jf = 0.0;
      for (std::size_t q = 0; q < er.points.size(); ++q) {
        const Vec2 x = a + er.points[q] * (b - a);
        const double w = er.weights[q] * len;
        const DiscretePoint d0 = cells[k0].at(x), d1 = cells[k1].at(x);
        js += w * ((detail::displacement_gradient(d0, prm0) - detail::displacement_gradient(d1, prm1)) * t).squaredNorm();
        const double f0 = detail::discrete_kappa_inv(d0, prm0).value * d0.phi.dot(t);
        const double f1 = detail::discrete_kappa_inv(d1, prm1).value * d1.phi.dot(t);
        jf += w * (f0 - f1) * (f0 - f1);
      }
      for (Index k : {k0, k1}) {
        rep.solid_terms[k][5] += 0.5 * len * js;
        rep.fluid_terms[k][3] += 0.5 * len * jf;
      }
      continue;
    }
    // Dirichlet edge
    const int region = mesh.cell(k0).region;
    double du = 0.0, dt = 0.0, dpt = 0.0, dp_ = 0.0;
    for (std::size_t q = 0; q < er.points.size(); ++q) {
      const Vec2 x = a + er.points[q] * (b - a);
      const double w = er.weights[q] * len;
      const DiscretePoint d = cells[k0].at(x);
      const ExactState ex = c.eval(x, region);
      du += w * (ex.u - d.u).squaredNorm();
      dt += w * (detail::displacement_gradient(d, prm0) * t - ex.grad_u * t).squaredNorm();
      const double kt = detail::discrete_kappa_inv(d, prm0).value * d.phi.dot(t);
      dpt += w * (kt - ex.grad_p.dot(t)) * (kt - ex.grad_p.dot(t));
      dp_ += w * (ex.p - d.p) * (ex.p - d.p);
    }
    rep.solid_terms[k0][4] += len * du;
    rep.solid_terms[k0][6] += len * dt;
    rep.fluid_terms[k0][4] += len * dpt;
    rep.fluid_terms[k0][5] += len * dp_;
  }

  rep.xi_s2.resize(nc);
  rep.xi_f2.resize(nc);
  rep.xi2.resize(nc);
  double total = 0.0;
  for (Index k = 0; k < nc; ++k) {
    rep.xi_s2[k] = std::accumulate(rep.solid_terms[k].begin(), rep.solid_terms[k].end(), 0.0);
    rep.xi_f2[k] = std::accumulate(rep.fluid_terms[k].begin(), rep.fluid_terms[k].end(), 0.0);
    rep.xi2[k] = rep.xi_s2[k] + rep.xi_f2[k];
    total += rep.xi2[k];
  }
  rep.xi = std::sqrt(total);
  return rep;
}

inline std::vector<double> estimate_solid(const Solution& sol, const ManufacturedCase& c) {
  return estimate(sol, c).xi_s2;
}

inline std::vector<double> estimate_fluid(const Solution& sol, const ManufacturedCase& c) {
  return estimate(sol, c).xi_f2;
}

/// e / Xi. NaN when both vanish; an error when only Xi does.
inline double efficiency_index(double error_total, double xi) {
  if (xi > 0.0) return error_total / xi;
  if (error_total == 0.0) return std::numeric_limits<double>::quiet_NaN();
  throw std::domain_error("efficiency_index: estimator is zero but the error is not");
}

// ---------------------------------------------------------------- marking

struct MarkingConfig {
  double zeta = 0.5;

  void validate() const {
    if (!(zeta > 0.0 && zeta <= 1.0)) throw std::invalid_argument("MarkingConfig: zeta must lie in (0, 1]");
  }
};

/// Smallest set whose squared indicators reach zeta times the total: cells
/// are taken by decreasing indicator, ties by increasing index.
inline std::vector<Index> dorfler_mark(const std::vector<double>& xi2, const MarkingConfig& cfg) {
  cfg.validate();
  if (xi2.empty()) throw std::invalid_argument("dorfler_mark: no indicators");
  std::vector<Index> order(xi2.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return xi2[a] > xi2[b]; });
  double total = 0.0;
  for (Index k : order) total += xi2[k];
  std::vector<Index> marked;
  double sum = 0.0;
  for (Index k : order) {
    if (sum >= cfg.zeta * total && !marked.empty()) break;
    marked.push_back(k);
    sum += xi2[k];
  }
  std::sort(marked.begin(), marked.end());
  return marked;
}

/// Cells whose own share of the squared estimator is at least zeta, plus the
/// Dorfler set so that the marked set is never empty.
inline std::vector<Index> threshold_mark(const std::vector<double>& xi2, const MarkingConfig& cfg) {
  std::vector<Index> marked = dorfler_mark(xi2, cfg);
  const double total = std::accumulate(xi2.begin(), xi2.end(), 0.0);
  for (Index k = 0; k < static_cast<Index>(xi2.size()); ++k)
    if (xi2[k] >= cfg.zeta * total) marked.push_back(k);
  std::sort(marked.begin(), marked.end());
  marked.erase(std::unique(marked.begin(), marked.end()), marked.end());
  return marked;
}

}  // namespace poroflow
