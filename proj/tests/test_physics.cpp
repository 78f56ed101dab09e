#include <gtest/gtest.h>

#include <random>

#include "poroflow/cases.hpp"

using namespace poroflow;

namespace {

ParameterSet example_params(PermeabilityLaw law) {
  ParameterSet p;
  p.lambda = p.mu = p.mu_f = 1.0;
  p.c0 = p.alpha = p.k0 = p.k1 = p.k2 = 0.1;
  p.law = law;
  return p;
}

Mat2 random_tensor(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  Mat2 t;
  t << u(rng), u(rng), u(rng), u(rng);
  return t;
}

/// Central-difference Jacobian of a tensor field: d[i](r, c) = d T(r, c) / d x_i.
template <typename F>
std::array<Mat2, 2> fd_gradient(F&& f, const Vec2& x, double h = 1e-5) {
  std::array<Mat2, 2> d;
  for (int i = 0; i < 2; ++i) d[i] = (f(x + h * Vec2::Unit(i)) - f(x - h * Vec2::Unit(i))) / (2.0 * h);
  return d;
}

/// Relative residuals of the momentum and mass balances at x, with every
/// derivative of sigma and phi taken by finite differences.
std::pair<double, double> balance_residuals(const ManufacturedCase& c, const Vec2& x) {
  const ParameterSet& prm = c.materials.base;
  const ExactState s = c.eval(x);
  const auto ds = fd_gradient([&](const Vec2& y) { return Mat2(c.eval(y).sigma); }, x);
  const Vec2 div_sigma(ds[0](0, 0) + ds[1](0, 1), ds[0](1, 0) + ds[1](1, 1));
  const auto dphi = fd_gradient(
      [&](const Vec2& y) {
        Mat2 m = Mat2::Zero();
        m.col(0) = c.eval(y).phi;
        return m;
      },
      x);
  const double div_phi = dphi[0](0, 0) + dphi[1](1, 0);
  const double mom = (s.f + div_sigma).norm() / std::max(1.0, s.f.norm());
  const double mass_rhs = prm.c0 * s.p + prm.alpha / prm.bulk() * s.sigma.trace() +
                          2.0 * prm.alpha * prm.alpha / prm.bulk() * s.p - div_phi;
  const double mass = std::abs(s.g - mass_rhs) / std::max(1.0, std::abs(s.g));
  return {mom, mass};
}

}  // namespace

TEST(Hooke, Examples) {
  const ParameterSet p;
  EXPECT_NEAR((hooke(Mat2::Identity(), p) - 4.0 * Mat2::Identity()).norm(), 0.0, 1e-15);
  EXPECT_NEAR((hooke_inv(Mat2::Identity(), p) - 0.25 * Mat2::Identity()).norm(), 0.0, 1e-15);
  Mat2 t;
  t << 1, 2, 3, 4;
  EXPECT_NEAR((hooke_inv(hooke(t, p), p) - t).norm(), 0.0, 1e-14);
}

TEST(Hooke, InverseAndLinearityOnRandomTensors) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.1, 100.0);
  for (int trial = 0; trial < 200; ++trial) {
    ParameterSet p;
    p.lambda = u(rng);
    p.mu = u(rng);
    const Mat2 t1 = random_tensor(rng), t2 = random_tensor(rng);
    const double a = u(rng) / 10, b = -u(rng) / 10;
    EXPECT_LE((hooke_inv(hooke(t1, p), p) - t1).cwiseAbs().maxCoeff(), 1e-13 * std::max(1.0, t1.norm()));
    EXPECT_LE((hooke(hooke_inv(t1, p), p) - t1).cwiseAbs().maxCoeff(), 1e-13 * std::max(1.0, t1.norm()));
    EXPECT_LE((hooke_inv(a * t1 + b * t2, p) - a * hooke_inv(t1, p) - b * hooke_inv(t2, p)).cwiseAbs().maxCoeff(),
              1e-13);
  }
}

TEST(Permeability, ValuesAtZeroContent) {
  const ParameterSet e = example_params(PermeabilityLaw::Exponential);
  EXPECT_NEAR(kappa(0, 0, e), 0.2, 1e-15);
  EXPECT_NEAR(kappa_inv(0, 0, e), 1.0 / 0.2, 1e-13);
  const ParameterSet kc = example_params(PermeabilityLaw::KozenyCarman);
  EXPECT_NEAR(kappa(0, 0, kc), 0.1, 1e-15);
}

TEST(Permeability, ExponentialExample) {
  const ParameterSet e = example_params(PermeabilityLaw::Exponential);
  EXPECT_NEAR(fluid_content(1.0, 1.0, e), 0.52, 1e-15);
  // 0.1 + 0.1 exp(0.013) to ten digits
  EXPECT_NEAR(kappa(1.0, 1.0, e), 0.2013084867, 1e-10);
  EXPECT_NEAR(kappa(1.0, 1.0, e), 0.20130845, 1e-7);
}

TEST(Permeability, KozenyCarmanClosedForm) {
  const ParameterSet kc = example_params(PermeabilityLaw::KozenyCarman);
  const double theta = 0.52, s = 4.0;
  EXPECT_NEAR(kappa(1.0, 1.0, kc), 0.1 + 0.1 * theta * theta * theta / (s * (s - theta) * (s - theta)), 1e-15);
}

TEST(Permeability, DerivativesVanishWithoutNonlinearPart) {
  for (PermeabilityLaw law : {PermeabilityLaw::Exponential, PermeabilityLaw::KozenyCarman}) {
    ParameterSet p = example_params(law);
    p.k1 = 0.0;
    const KappaValue k = kappa_inv_with_derivatives(0.7, -0.3, p);
    EXPECT_EQ(k.d_tr_sigma, 0.0);
    EXPECT_EQ(k.d_p, 0.0);
    EXPECT_NEAR(k.value, p.mu_f / p.k0, 1e-14);
  }
}

/// Fourth-order central difference of f at 0.
template <typename F>
double five_point(F&& f, double h = 1e-3) {
  return (f(-2 * h) - 8 * f(-h) + 8 * f(h) - f(2 * h)) / (12 * h);
}

TEST(Permeability, InverseDerivativesMatchFiniteDifferences) {
  std::mt19937 rng(12);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (PermeabilityLaw law : {PermeabilityLaw::Exponential, PermeabilityLaw::KozenyCarman}) {
    const ParameterSet p = example_params(law);
    for (int i = 0; i < 20; ++i) {
      const double tr = u(rng), q = u(rng), h = 1e-6;
      const KappaValue k = kappa_inv_with_derivatives(tr, q, p);
      const double d_tr = five_point([&](double t) { return kappa_inv(tr + t, q, p); });
      const double d_p = five_point([&](double t) { return kappa_inv(tr, q + t, p); });
      EXPECT_NEAR(k.d_tr_sigma, d_tr, 1e-6 * std::abs(d_tr));
      EXPECT_NEAR(k.d_p, d_p, 1e-6 * std::abs(d_p));
      const KappaValue kk = kappa_with_derivatives(tr, q, p);
      EXPECT_NEAR(kk.d_tr_sigma, (kappa(tr + h, q, p) - kappa(tr - h, q, p)) / (2 * h), 1e-8);
    }
  }
}

TEST(Permeability, ExponentialBoundedBelow) {
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  const ParameterSet p = example_params(PermeabilityLaw::Exponential);
  for (int i = 0; i < 1000; ++i) EXPECT_GE(kappa(u(rng), u(rng), p), p.k0 / p.mu_f);
}

TEST(Permeability, KozenyCarmanSingularityAndPositivity) {
  const ParameterSet p = example_params(PermeabilityLaw::KozenyCarman);
  // fluid content equal to d lambda + 2 mu
  const double tr = 4.0 / p.alpha;
  EXPECT_THROW(kappa(tr, 0.0, p), PhysicsError);
  try {
    kappa(tr, 0.0, p);
  } catch (const PhysicsError& e) {
    EXPECT_NE(std::string(e.what()).find("Kozeny-Carman"), std::string::npos);
  }
  // strongly negative content drives the cubic term below -k0
  EXPECT_THROW(kappa(-1000.0, 0.0, p), PhysicsError);
  EXPECT_NO_THROW(kappa(-1.0, 0.0, p));
}

TEST(Parameters, GammaValues) {
  const ParameterSet p = example_params(PermeabilityLaw::KozenyCarman);
  EXPECT_NEAR(gamma(p), 0.1 * std::sqrt(2.0) / 4.0, 1e-16);
  EXPECT_NEAR(gamma(p), 0.0353553, 1e-7);
  EXPECT_NEAR(gamma_tilde(p), 0.105, 1e-15);
  ParameterSet q = p;
  q.alpha = 0.0;
  EXPECT_EQ(gamma(q), 0.0);
  EXPECT_EQ(gamma_tilde(q), q.c0);
}

TEST(Parameters, Validation) {
  EXPECT_NO_THROW(ParameterSet{}.validate());
  auto bad = [](auto mutate) {
    ParameterSet p;
    mutate(p);
    EXPECT_THROW(p.validate(), std::invalid_argument);
  };
  bad([](ParameterSet& p) { p.lambda = 0; });
  bad([](ParameterSet& p) { p.mu = -1; });
  bad([](ParameterSet& p) { p.mu_f = 0; });
  bad([](ParameterSet& p) { p.k0 = 0; });
  bad([](ParameterSet& p) { p.k1 = -0.1; });
  bad([](ParameterSet& p) { p.alpha = 1.5; });
  bad([](ParameterSet& p) { p.c0 = -1; });
}

TEST(Parameters, RegionLookupFallsBackToBase) {
  Materials m;
  m.base.lambda = 2.0;
  m.regions[3].lambda = 7.0;
  EXPECT_EQ(m.at(0).lambda, 2.0);
  EXPECT_EQ(m.at(3).lambda, 7.0);
}

// ------------------------------------------------------------------ cases

TEST(Cases, ExampleOneValues) {
  const ManufacturedCase c = example1_case();
  const ExactState s = c.eval(Vec2(0.5, 0.5));
  EXPECT_NEAR(s.u.norm(), 0.0, 1e-15);
  EXPECT_NEAR(s.p, 1.0, 1e-15);
  EXPECT_EQ(c.materials.base.law, PermeabilityLaw::KozenyCarman);
  EXPECT_EQ(c.geometry, Geometry::UnitSquare);
  const Vec2 x(0.3, 0.8);
  const double w = 1.5 * std::numbers::pi;
  EXPECT_NEAR(c.displacement(x).x(), 0.05 * std::cos(w * 1.1), 1e-15);
  EXPECT_NEAR(c.displacement(x).y(), 0.05 * std::sin(w * -0.5), 1e-15);
}

TEST(Cases, ExampleOneDerivedFieldsMatchFiniteDifferences) {
  const ManufacturedCase c = example1_case();
  const ParameterSet& prm = c.materials.base;
  std::mt19937 rng(14);
  std::uniform_real_distribution<double> u(0.02, 0.98);
  for (int i = 0; i < 100; ++i) {
    const Vec2 x(u(rng), u(rng));
    const auto [mom, mass] = balance_residuals(c, x);
    EXPECT_LT(mom, 1e-5);
    EXPECT_LT(mass, 1e-5);
    // sigma from finite-difference strains
    const ExactState s = c.eval(x);
    const double h = 1e-6;
    Mat2 grad;
    for (int d = 0; d < 2; ++d) grad.col(d) = (c.displacement(x + h * Vec2::Unit(d)) - c.displacement(x - h * Vec2::Unit(d))) / (2 * h);
    const Mat2 eps = 0.5 * (grad + grad.transpose());
    const double p = c.pressure(x);
    const Mat2 sigma = prm.lambda * eps.trace() * Mat2::Identity() + 2 * prm.mu * eps - prm.alpha * p * Mat2::Identity();
    EXPECT_NEAR((sigma - s.sigma).norm(), 0.0, 1e-8);
    EXPECT_NEAR(s.rho, 0.5 * (grad(0, 1) - grad(1, 0)), 1e-8);
    const Mat2 skew = s.grad_u - 0.5 * (s.grad_u + s.grad_u.transpose());
    EXPECT_LT((skew + skew.transpose()).norm(), 1e-12);
    EXPECT_NEAR(skew(0, 1), s.rho, 1e-15);
    Vec2 gp;
    for (int d = 0; d < 2; ++d) gp[d] = (c.pressure(x + h * Vec2::Unit(d)) - c.pressure(x - h * Vec2::Unit(d))) / (2 * h);
    EXPECT_NEAR((s.phi - kappa(sigma.trace(), p, prm) * gp).norm(), 0.0, 1e-8);
  }
}

TEST(Cases, ExampleThreeValues) {
  const ManufacturedCase c = example3_case();
  EXPECT_NEAR(c.pressure(Vec2(1.0, 0.0)), 0.5, 1e-15);
  EXPECT_EQ(c.displacement(Vec2::Zero()).norm(), 0.0);
  EXPECT_EQ(c.pressure(Vec2::Zero()), 0.0);
  EXPECT_THROW(c.eval(Vec2::Zero()), PhysicsError);
  const ParameterSet& p = c.materials.base;
  EXPECT_NEAR(2.0 * (p.lambda + 2.0 * p.mu) / (p.mu + p.lambda), 2.0198020, 1e-7);
  EXPECT_EQ(p.lambda, 1e3);
  EXPECT_EQ(p.mu, 10.0);
  EXPECT_EQ(p.k0, 0.5);
  EXPECT_EQ(p.alpha, 0.25);
  EXPECT_EQ(p.law, PermeabilityLaw::KozenyCarman);
  EXPECT_EQ(c.geometry, Geometry::LShape);
  // theta is continuous across the positive axes and the upper-left quadrant
  for (const Vec2& x : {Vec2(0.5, 0.0), Vec2(0.0, 0.5), Vec2(-0.5, 0.2)}) {
    const double h = 1e-9;
    EXPECT_NEAR(c.pressure(x + Vec2(h, h)), c.pressure(x - Vec2(h, h)), 1e-7);
  }
  // both readings of the displacement share the pressure and the radial scaling
  const ManufacturedCase cart = example3_case({false, 1.5 * std::numbers::pi});
  EXPECT_EQ(cart.pressure(Vec2(0.3, 0.4)), c.pressure(Vec2(0.3, 0.4)));
  EXPECT_NEAR(cart.displacement(Vec2(0.3, 0.4)).norm(), c.displacement(Vec2(0.3, 0.4)).norm(), 1e-14);
}

TEST(Cases, ExampleThreeDerivedFieldsMatchFiniteDifferences) {
  for (bool polar : {true, false}) {
    const ManufacturedCase c = example3_case({polar, 1.5 * std::numbers::pi});
    std::mt19937 rng(15);
    std::uniform_real_distribution<double> u(-0.98, 0.98);
    int checked = 0;
    while (checked < 100) {
      const Vec2 x(u(rng), u(rng));
      if ((x.x() < 0.02 && x.y() < 0.02) || x.norm() < 0.05) continue;
      const auto [mom, mass] = balance_residuals(c, x);
      EXPECT_LT(mom, 1e-5) << x.transpose();
      EXPECT_LT(mass, 1e-5) << x.transpose();
      ++checked;
    }
  }
}

TEST(Cases, ConstantStateFieldsAreConstant) {
  Mat2 A;
  A << 0.1, 0.3, -0.2, 0.05;
  const ManufacturedCase c = constant_state_case(A, Vec2(0.4, -0.1), 0.7);
  const ExactState a = c.eval(Vec2(0.1, 0.2)), b = c.eval(Vec2(0.9, 0.6));
  EXPECT_NEAR((a.sigma - b.sigma).norm(), 0.0, 1e-15);
  EXPECT_NEAR(a.phi.norm(), 0.0, 1e-15);
  EXPECT_NEAR(a.f.norm(), 0.0, 1e-15);
  EXPECT_NEAR(a.rho, 0.25, 1e-15);
}

TEST(Cases, CustomCaseHasZeroData) {
  const ManufacturedCase c = custom_case(Materials{}, Geometry::LShape);
  const ExactState s = c.eval(Vec2(0.3, 0.4));
  EXPECT_EQ(s.f.norm(), 0.0);
  EXPECT_EQ(s.g, 0.0);
  EXPECT_EQ(c.geometry, Geometry::LShape);
}
