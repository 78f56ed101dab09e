#pragma once

// Material parameters, the Hooke tensor and its inverse, and the two
// stress/pressure-dependent permeability laws (isotropic, kappa_s * I).

#include <cmath>
#include <map>
#include <sstream>
#include <string>

#include "error.hpp"
#include "geometry.hpp"

namespace poroflow {

enum class PermeabilityLaw { Exponential, KozenyCarman };

struct ParameterSet {
  double lambda = 1.0;
  double mu = 1.0;
  double alpha = 0.1;   // Biot-Willis coefficient
  double c0 = 0.1;      // storativity
  double k0 = 0.1;
  double k1 = 0.1;
  double k2 = 0.1;      // exponential law rate
  double mu_f = 1.0;    // fluid viscosity
  PermeabilityLaw law = PermeabilityLaw::KozenyCarman;

  static constexpr int dim = 2;

  /// d*lambda + 2*mu
  double bulk() const { return dim * lambda + 2.0 * mu; }

  void validate() const {
    auto require = [](bool ok, const char* msg) {
      if (!ok) throw std::invalid_argument(std::string("ParameterSet: ") + msg);
    };
    require(lambda > 0.0, "lambda must be > 0");
    require(mu > 0.0, "mu must be > 0");
    require(mu_f > 0.0, "mu_f must be > 0");
    require(k0 > 0.0, "k0 must be > 0");
    require(k1 >= 0.0, "k1 must be >= 0");
    require(alpha >= 0.0 && alpha <= 1.0, "alpha must lie in [0, 1]");
    require(c0 >= 0.0, "c0 must be >= 0");
  }
};

/// Per-region parameters with a default for untagged regions.
struct Materials {
  ParameterSet base;
  std::map<int, ParameterSet> regions;

  const ParameterSet& at(int region) const {
    const auto it = regions.find(region);
    return it == regions.end() ? base : it->second;
  }
};

inline Mat2 hooke(const Mat2& tau, const ParameterSet& prm) {
  return prm.lambda * tau.trace() * Mat2::Identity() + 2.0 * prm.mu * tau;
}

inline Mat2 hooke_inv(const Mat2& tau, const ParameterSet& prm) {
  const double shear = 1.0 / (2.0 * prm.mu);
  const double vol = prm.lambda / (2.0 * prm.mu * prm.bulk());
  return shear * tau - vol * tau.trace() * Mat2::Identity();
}

/// alpha * sqrt(d) / (d*lambda + 2*mu)
inline double gamma(const ParameterSet& prm) {
  return prm.alpha * std::sqrt(static_cast<double>(ParameterSet::dim)) / prm.bulk();
}

/// c0 + d*alpha^2 / (d*lambda + 2*mu)
inline double gamma_tilde(const ParameterSet& prm) {
  return prm.c0 + ParameterSet::dim * prm.alpha * prm.alpha / prm.bulk();
}

/// Fluid-content variable (c0 (d lambda + 2 mu) + d alpha^2) p + alpha tr(sigma).
inline double fluid_content(double tr_sigma, double p, const ParameterSet& prm) {
  return (prm.c0 * prm.bulk() + ParameterSet::dim * prm.alpha * prm.alpha) * p + prm.alpha * tr_sigma;
}

/// kappa_s together with its partial derivatives in tr(sigma) and p.
struct KappaValue {
  double value = 0.0;
  double d_tr_sigma = 0.0;
  double d_p = 0.0;
};

inline KappaValue kappa_with_derivatives(double tr_sigma, double p, const ParameterSet& prm) {
  const double s = prm.bulk();
  const double theta = fluid_content(tr_sigma, p, prm);
  const double base = prm.k0 / prm.mu_f;
  double value = base, d_theta = 0.0;
  if (prm.law == PermeabilityLaw::Exponential) {
    const double e = std::exp(prm.k2 * theta / s);
    value += prm.k1 / prm.mu_f * e;
    d_theta = prm.k1 / prm.mu_f * prm.k2 / s * e;
  } else {
    const double gap = s - theta;
    if (std::abs(gap) <= 1e-12 * s) {
      std::ostringstream msg;
      msg << "Kozeny-Carman permeability singular: fluid content " << theta
          << " reaches d*lambda + 2*mu = " << s;
      throw PhysicsError(msg.str());
    }
    const double scale = prm.k1 / (s * prm.mu_f);
    value += scale * theta * theta * theta / (gap * gap);
    d_theta = scale * (3.0 * theta * theta / (gap * gap) + 2.0 * theta * theta * theta / (gap * gap * gap));
  }
  if (!(value > 1e-12 * base)) {
    std::ostringstream msg;
    msg << "permeability not positive: kappa = " << value << " at tr(sigma) = " << tr_sigma
        << ", p = " << p;
    throw PhysicsError(msg.str());
  }
  return {value, d_theta * prm.alpha,
          d_theta * (prm.c0 * s + ParameterSet::dim * prm.alpha * prm.alpha)};
}

inline double kappa(double tr_sigma, double p, const ParameterSet& prm) {
  return kappa_with_derivatives(tr_sigma, p, prm).value;
}

inline double kappa_inv(double tr_sigma, double p, const ParameterSet& prm) {
  return 1.0 / kappa(tr_sigma, p, prm);
}

/// kappa_s^{-1} and its partial derivatives in tr(sigma) and p.
inline KappaValue kappa_inv_with_derivatives(double tr_sigma, double p, const ParameterSet& prm) {
  const KappaValue k = kappa_with_derivatives(tr_sigma, p, prm);
  const double inv = 1.0 / k.value;
  return {inv, -k.d_tr_sigma * inv * inv, -k.d_p * inv * inv};
}

}  // namespace poroflow
