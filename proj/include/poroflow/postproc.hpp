#pragma once

// Errors against manufactured solutions, convergence rates and the local
// conservation metrics.

#include <cmath>
#include <limits>
#include <optional>

#include "solver.hpp"

namespace poroflow {

inline constexpr int kErrorDegree = kFormDegree + 4;

/// How the divergence parts of the H(div) errors are measured.
enum class DivErrorMode {
  Analytic,      // ||div sigma - div sigma_h||, ||div phi - div phi_h||
  ProjectedDiv,  // ||P_h[div sigma_h + f]||, ||P_h[mass residual]||
};

struct ErrorReport {
  Index dofs = 0;
  double h = 0.0;
  double e_sigma = 0.0, e_u = 0.0, e_rho = 0.0, e_phi = 0.0, e_p = 0.0;
  /// Split of the H(div) errors into L2 and divergence parts.
  double e_sigma_l2 = 0.0, e_sigma_div = 0.0, e_phi_l2 = 0.0, e_phi_div = 0.0;

  double total() const { return e_sigma + e_u + e_rho + e_phi + e_p; }
};

namespace detail {

/// The cell rule, subdivided once when the cell touches `singular`.
inline const QuadratureRule& cell_rule(const TriMesh& mesh, Index k, int degree, const std::optional<Vec2>& singular,
                                       QuadratureRule& storage) {
  const QuadratureRule& base = quadrature(degree);
  if (!singular) return base;
  for (int j = 0; j < 3; ++j)
    if ((mesh.cell_vertex(k, j) - *singular).norm() == 0.0) {
      storage = subdivide(base);
      return storage;
    }
  return base;
}

}  // namespace detail

inline ErrorReport compute_errors(const Solution& sol, const ManufacturedCase& c,
                                  DivErrorMode mode = DivErrorMode::Analytic, int degree = kErrorDegree) {
  const TriMesh& mesh = *sol.mesh;
  const SystemLayout& L = *sol.layout;
  ErrorReport r;
  r.dofs = L.total();
  r.h = mesh.mesh_size();
  double s_l2 = 0, s_div = 0, u2 = 0, rho2 = 0, f_l2 = 0, f_div = 0, p2 = 0;
  QuadratureRule storage;
  for (Index k = 0; k < mesh.num_cells(); ++k) {
    const CellFields cf(mesh, L, sol.x, k);
    const CellGeometry& geo = cf.geometry();
    const int region = mesh.cell(k).region;
    const ParameterSet& prm = c.materials.at(region);
    const QuadratureRule& rule = detail::cell_rule(mesh, k, degree, c.singular_point, storage);
    Vec2 mean_eq = Vec2::Zero();
    double mean_mass = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Vec2 x = geo.map(rule.points[q]);
      const double w = rule.weights[q] * 2.0 * geo.area;
      const ExactState ex = c.eval(x, region);
      const DiscretePoint dp = cf.at(x);
      s_l2 += w * (ex.sigma - dp.sigma).squaredNorm();
      u2 += w * (ex.u - dp.u).squaredNorm();
      rho2 += w * 2.0 * (ex.rho - dp.rho) * (ex.rho - dp.rho);
      f_l2 += w * (ex.phi - dp.phi).squaredNorm();
      p2 += w * (ex.p - dp.p) * (ex.p - dp.p);
      if (mode == DivErrorMode::Analytic) {
        s_div += w * (ex.div_sigma - dp.div_sigma).squaredNorm();
        f_div += w * (ex.div_phi - dp.div_phi) * (ex.div_phi - dp.div_phi);
      } else {
        mean_eq += w * (dp.div_sigma + ex.f);
        mean_mass += w * (gamma_tilde(prm) * dp.p + prm.alpha / prm.bulk() * dp.sigma.trace() - dp.div_phi - ex.g);
      }
    }
    if (mode == DivErrorMode::ProjectedDiv) {
      s_div += mean_eq.squaredNorm() / geo.area;
      f_div += mean_mass * mean_mass / geo.area;
    }
  }
  r.e_sigma_l2 = std::sqrt(s_l2);
  r.e_sigma_div = std::sqrt(s_div);
  r.e_phi_l2 = std::sqrt(f_l2);
  r.e_phi_div = std::sqrt(f_div);
  r.e_sigma = std::sqrt(s_l2 + s_div);
  r.e_u = std::sqrt(u2);
  r.e_rho = std::sqrt(rho2);
  r.e_phi = std::sqrt(f_l2 + f_div);
  r.e_p = std::sqrt(p2);
  return r;
}

// ------------------------------------------------------------------ rates

enum class RateMode { MeshSize, Dofs };

/// log(e/e_prev) / log(h/h_prev), or -2 log(e/e_prev) / log(N/N_prev).
/// Undefined (NaN) when either error is zero or the abscissae coincide.
inline double convergence_rate(double e, double e_prev, double x, double x_prev, RateMode mode) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (!(e > 0.0) || !(e_prev > 0.0) || !(x > 0.0) || !(x_prev > 0.0) || x == x_prev) return nan;
  const double ratio = std::log(e / e_prev);
  return mode == RateMode::MeshSize ? ratio / std::log(x / x_prev) : -2.0 * ratio / std::log(x / x_prev);
}

struct RateRow {
  double sigma, u, rho, phi, p, total;
};

/// Rates of each history entry against its predecessor; the first row is NaN.
inline std::vector<RateRow> convergence_rates(const std::vector<ErrorReport>& history, RateMode mode) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<RateRow> out;
  for (std::size_t i = 0; i < history.size(); ++i) {
    if (i == 0) {
      out.push_back({nan, nan, nan, nan, nan, nan});
      continue;
    }
    const ErrorReport &a = history[i], &b = history[i - 1];
    const double x = mode == RateMode::MeshSize ? a.h : static_cast<double>(a.dofs);
    const double xp = mode == RateMode::MeshSize ? b.h : static_cast<double>(b.dofs);
    auto rate = [&](double e, double ep) { return convergence_rate(e, ep, x, xp, mode); };
    out.push_back({rate(a.e_sigma, b.e_sigma), rate(a.e_u, b.e_u), rate(a.e_rho, b.e_rho), rate(a.e_phi, b.e_phi),
                   rate(a.e_p, b.e_p), rate(a.total(), b.total())});
  }
  return out;
}

// ----------------------------------------------------------- conservation

struct ConservationMetrics {
  double equ_h = 0.0;
  double mass_h = 0.0;
};

/// Expression projected for mass_h.
enum class MassMetric {
  Residual,   // gamma_tilde p_h + alpha/(d lambda + 2 mu) tr sigma_h - div phi_h - g
  AsPrinted,  // gamma_tilde p_h + alpha/(d lambda + 2 mu) tr sigma_h + div phi_h + g
};

/// Max-norm of the cellwise means of div sigma_h + f and of the mass
/// expression. The load means use the same rule as the assembled load vectors.
inline ConservationMetrics conservation_metrics(const Solution& sol, const ManufacturedCase& c,
                                                MassMetric form = MassMetric::Residual) {
  const TriMesh& mesh = *sol.mesh;
  const SystemLayout& L = *sol.layout;
  const QuadratureRule& rule = quadrature(kFormDegree);
  ConservationMetrics m;
  for (Index k = 0; k < mesh.num_cells(); ++k) {
    const CellFields cf(mesh, L, sol.x, k);
    const CellGeometry& geo = cf.geometry();
    const int region = mesh.cell(k).region;
    const ParameterSet& prm = c.materials.at(region);
    Vec2 eq = Vec2::Zero();
    double mass = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Vec2 x = geo.map(rule.points[q]);
      const double w = rule.weights[q] * 2.0;  // mean over the cell
      const ExactState ex = c.eval(x, region);
      const DiscretePoint dp = cf.at(x);
      eq += w * (dp.div_sigma + ex.f);
      const double sign = form == MassMetric::Residual ? -1.0 : 1.0;
      mass += w * (gamma_tilde(prm) * dp.p + prm.alpha / prm.bulk() * dp.sigma.trace() + sign * (dp.div_phi + ex.g));
    }
    m.equ_h = std::max(m.equ_h, eq.cwiseAbs().maxCoeff());
    m.mass_h = std::max(m.mass_h, std::abs(mass));
  }
  return m;
}

}  // namespace poroflow
