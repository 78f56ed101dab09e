#pragma once

// Manufactured solutions. A case supplies u and p as closed forms written
// over a generic scalar; every derived field (sigma, rho, phi, f, g and the
// boundary data) follows from one second-order Jet evaluation.

#include <functional>
#include <numbers>
#include <optional>
#include <string>

#include "jet.hpp"
#include "physics.hpp"

namespace poroflow {

enum class Geometry { UnitSquare, LShape, MeshFile };

/// Every exact quantity at one point.
struct ExactState {
  Vec2 u = Vec2::Zero();
  Mat2 grad_u = Mat2::Zero();  // (i, j) = d u_i / d x_j
  double p = 0.0;
  Vec2 grad_p = Vec2::Zero();
  Mat2 sigma = Mat2::Zero();
  Vec2 div_sigma = Vec2::Zero();
  double tr_sigma = 0.0;
  /// The [0][1] entry of the skew part of grad u.
  double rho = 0.0;
  KappaValue kappa;
  Vec2 phi = Vec2::Zero();
  double div_phi = 0.0;
  Vec2 f = Vec2::Zero();
  double g = 0.0;
};

struct ManufacturedCase {
  using VectorField = std::function<std::array<Jet, 2>(const Jet&, const Jet&)>;
  using ScalarField = std::function<Jet(const Jet&, const Jet&)>;

  std::string name;
  Materials materials;
  VectorField u;
  ScalarField p;
  Geometry geometry = Geometry::UnitSquare;
  /// Point where the exact fields are not differentiable.
  std::optional<Vec2> singular_point;

  ExactState eval(const Vec2& x, int region = 0) const {
    if (singular_point && (x - *singular_point).norm() == 0.0)
      throw PhysicsError("case '" + name + "': derivatives requested at the singular point");
    const ParameterSet& prm = materials.at(region);
    const Jet X = Jet::variable(x.x(), 0), Y = Jet::variable(x.y(), 1);
    const auto U = u(X, Y);
    const Jet P = p(X, Y);

    ExactState s;
    s.u = Vec2(U[0].v, U[1].v);
    s.grad_u.row(0) = U[0].g.transpose();
    s.grad_u.row(1) = U[1].g.transpose();
    s.p = P.v;
    s.grad_p = P.g;

    const double div_u = s.grad_u.trace();
    const Vec2 grad_div_u = U[0].h.col(0) + U[1].h.col(1);
    const Vec2 lap_u(U[0].h.trace(), U[1].h.trace());
    s.sigma = (prm.lambda * div_u - prm.alpha * s.p) * Mat2::Identity() +
              prm.mu * (s.grad_u + s.grad_u.transpose());
    s.div_sigma = (prm.lambda + prm.mu) * grad_div_u + prm.mu * lap_u - prm.alpha * s.grad_p;
    s.tr_sigma = s.sigma.trace();
    s.rho = 0.5 * (s.grad_u(0, 1) - s.grad_u(1, 0));

    const Vec2 grad_tr = prm.bulk() * grad_div_u - ParameterSet::dim * prm.alpha * s.grad_p;
    s.kappa = kappa_with_derivatives(s.tr_sigma, s.p, prm);
    s.phi = s.kappa.value * s.grad_p;
    s.div_phi = s.kappa.value * P.h.trace() + (s.kappa.d_tr_sigma * grad_tr + s.kappa.d_p * s.grad_p).dot(s.grad_p);
    s.f = -s.div_sigma;
    s.g = gamma_tilde(prm) * s.p + prm.alpha / prm.bulk() * s.tr_sigma - s.div_phi;
    return s;
  }

  /// Value-only evaluation; finite at the singular point.
  Vec2 displacement(const Vec2& x) const {
    const auto U = u(Jet(x.x()), Jet(x.y()));
    return {U[0].v, U[1].v};
  }
  double pressure(const Vec2& x) const { return p(Jet(x.x()), Jet(x.y())).v; }
};

inline ManufacturedCase example1_case() {
  ManufacturedCase c;
  c.name = "example1";
  ParameterSet& prm = c.materials.base;
  prm.lambda = prm.mu = prm.mu_f = 1.0;
  prm.k0 = prm.k1 = prm.c0 = prm.alpha = 0.1;
  prm.k2 = 0.1;
  prm.law = PermeabilityLaw::KozenyCarman;
  c.u = [](const Jet& x, const Jet& y) -> std::array<Jet, 2> {
    const double w = 1.5 * std::numbers::pi;
    return {Jet(0.05) * cos(w * (x + y)), Jet(0.05) * sin(w * (x - y))};
  };
  c.p = [](const Jet& x, const Jet& y) { return sin(std::numbers::pi * x) * sin(std::numbers::pi * y); };
  c.geometry = Geometry::UnitSquare;
  return c;
}

/// Reading of the L-shape displacement formula: components taken as
/// Cartesian (x, y) or as polar (r, theta), and the corner angle in M1.
struct LShapeOptions {
  bool polar_components = true;
  double omega = 1.5 * std::numbers::pi;
};

inline constexpr double kLShapeExponent = 0.54448373;

inline ManufacturedCase example3_case(LShapeOptions opt = {}) {
  ManufacturedCase c;
  c.name = "example3";
  ParameterSet& prm = c.materials.base;
  prm.lambda = 1e3;
  prm.mu = 10.0;
  prm.k0 = 0.5;
  prm.mu_f = prm.c0 = prm.k1 = 0.1;
  prm.alpha = 0.25;
  prm.k2 = 0.1;
  prm.law = PermeabilityLaw::KozenyCarman;

  const double chi = kLShapeExponent;
  const double m1 = -std::cos((chi + 1.0) * opt.omega) / std::cos((chi - 1.0) * opt.omega);
  const double m2 = 2.0 * (prm.lambda + 2.0 * prm.mu) / (prm.mu + prm.lambda);
  const double mu = prm.mu;
  // theta continuous on the L-shape: branch cut inside the removed quadrant.
  auto angle = [](const Jet& x, const Jet& y) {
    Jet t = atan2(y, x);
    if (t.v < -0.5 * std::numbers::pi) t.v += 2.0 * std::numbers::pi;
    return t;
  };
  c.u = [=](const Jet& x, const Jet& y) -> std::array<Jet, 2> {
    if (x.v == 0.0 && y.v == 0.0) return {Jet(0.0), Jet(0.0)};
    const Jet r = sqrt(x * x + y * y);
    const Jet t = angle(x, y);
    const Jet s = pow(r, chi) / (2.0 * mu);
    const Jet a = s * (-(chi + 1.0) * cos((chi + 1.0) * t) + (m2 - chi - 1.0) * m1 * cos((chi - 1.0) * t));
    const Jet b = s * ((chi + 1.0) * sin((chi + 1.0) * t) + (m2 + chi - 1.0) * m1 * sin((chi - 1.0) * t));
    if (!opt.polar_components) return {a, b};
    const Jet ct = cos(t), st = sin(t);
    return {a * ct - b * st, a * st + b * ct};
  };
  c.p = [=](const Jet& x, const Jet& y) {
    if (x.v == 0.0 && y.v == 0.0) return Jet(0.0);
    const Jet r = sqrt(x * x + y * y);
    return pow(r, 1.0 / 3.0) * sin((0.5 * std::numbers::pi + angle(x, y)) * (1.0 / 3.0));
  };
  c.geometry = Geometry::LShape;
  c.singular_point = Vec2::Zero();
  return c;
}

/// u = A x + b, p = c: every field lies in the discrete spaces.
inline ManufacturedCase constant_state_case(const Mat2& A, const Vec2& b, double pc,
                                            const ParameterSet& prm = {}) {
  ManufacturedCase c;
  c.name = "constant_state";
  c.materials.base = prm;
  c.u = [=](const Jet& x, const Jet& y) -> std::array<Jet, 2> {
    return {A(0, 0) * x + A(0, 1) * y + b.x(), A(1, 0) * x + A(1, 1) * y + b.y()};
  };
  c.p = [=](const Jet&, const Jet&) { return Jet(pc); };
  return c;
}

/// Homogeneous data with user parameters; the exact solution is zero.
inline ManufacturedCase custom_case(const Materials& materials, Geometry geometry = Geometry::UnitSquare) {
  ManufacturedCase c;
  c.name = "custom";
  c.materials = materials;
  c.u = [](const Jet&, const Jet&) -> std::array<Jet, 2> { return {Jet(0.0), Jet(0.0)}; };
  c.p = [](const Jet&, const Jet&) { return Jet(0.0); };
  c.geometry = geometry;
  return c;
}

}  // namespace poroflow
