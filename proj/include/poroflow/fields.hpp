#pragma once

// Pointwise evaluation of PEERS_0 stress basis tensors and of discrete
// five-field iterates stored as one global coefficient vector.

#include <Eigen/Dense>

#include "spaces.hpp"

namespace poroflow {

/// The eight local stress basis tensors at one point. Row r of tensor i is
/// the vector basis function; grad_rows[i] holds d(row)_a / d x_b.
struct StressBasis {
  std::array<Mat2, 8> value;
  std::array<Vec2, 8> div;
  std::array<Mat2, 8> grad_row;  // gradient of the nonzero row
  std::array<int, 8> row{};
};

inline StressBasis eval_stress_basis(const CellGeometry& geo, const Vec2& x) {
  const Rt0Values rt = eval_rt0_basis(geo, x);
  const BubbleValues bb = eval_bubble_basis(geo, x);
  StressBasis s;
  for (int r = 0; r < 2; ++r) {
    for (int j = 0; j < 3; ++j) {
      const int i = 3 * r + j;
      s.value[i] = Mat2::Zero();
      s.value[i].row(r) = rt.value[j].transpose();
      s.div[i] = Vec2::Zero();
      s.div[i][r] = rt.div[j];
      s.grad_row[i] = rt.grad_scale[j] * Mat2::Identity();
      s.row[i] = r;
    }
    const int i = 6 + r;
    s.value[i] = Mat2::Zero();
    s.value[i].row(r) = bb.value.transpose();
    s.div[i] = Vec2::Zero();
    s.grad_row[i] = bb.grad;
    s.row[i] = r;
  }
  return s;
}

/// Discrete fields and the derivatives needed by the estimator.
struct DiscretePoint {
  Mat2 sigma = Mat2::Zero();
  Vec2 div_sigma = Vec2::Zero();
  std::array<Mat2, 2> grad_sigma_row{Mat2::Zero(), Mat2::Zero()};
  Vec2 u = Vec2::Zero();
  double rho = 0.0;
  Vec2 grad_rho = Vec2::Zero();
  Vec2 phi = Vec2::Zero();
  double div_phi = 0.0;
  Mat2 grad_phi = Mat2::Zero();
  double p = 0.0;
};

/// Local coefficients of a global iterate on one cell.
class CellFields {
 public:
  CellFields(const TriMesh& mesh, const SystemLayout& layout, const Eigen::VectorXd& x, Index k)
      : geo_(CellGeometry::of(mesh, k)) {
    auto gather = [&](Field f, double* out) {
      const DofLayout& L = layout[f];
      const Index* d = L.dofs(k);
      for (int i = 0; i < L.dofs_per_cell; ++i) out[i] = x[layout.begin(f) + d[i]];
    };
    gather(Field::Stress, sigma_.data());
    gather(Field::Displacement, u_.data());
    gather(Field::Rotation, rho_.data());
    gather(Field::Flux, phi_.data());
    gather(Field::Pressure, &p_);
  }

  const CellGeometry& geometry() const { return geo_; }
  const std::array<double, 8>& sigma_coeffs() const { return sigma_; }
  double pressure() const { return p_; }
  Vec2 displacement() const { return {u_[0], u_[1]}; }

  double tr_sigma(const Vec2& x) const {
    const StressBasis s = eval_stress_basis(geo_, x);
    double t = 0.0;
    for (int i = 0; i < 8; ++i) t += sigma_[i] * s.value[i].trace();
    return t;
  }

  Vec2 phi(const Vec2& x) const {
    const Rt0Values rt = eval_rt0_basis(geo_, x);
    Vec2 v = Vec2::Zero();
    for (int j = 0; j < 3; ++j) v += phi_[j] * rt.value[j];
    return v;
  }

  DiscretePoint at(const Vec2& x) const {
    DiscretePoint out;
    const StressBasis s = eval_stress_basis(geo_, x);
    for (int i = 0; i < 8; ++i) {
      out.sigma += sigma_[i] * s.value[i];
      out.div_sigma += sigma_[i] * s.div[i];
      out.grad_sigma_row[s.row[i]] += sigma_[i] * s.grad_row[i];
    }
    out.u = displacement();
    const P1Values hat = eval_p1_basis(geo_, x);
    for (int j = 0; j < 3; ++j) {
      out.rho += rho_[j] * hat.value[j];
      out.grad_rho += rho_[j] * hat.grad[j];
    }
    const Rt0Values rt = eval_rt0_basis(geo_, x);
    for (int j = 0; j < 3; ++j) {
      out.phi += phi_[j] * rt.value[j];
      out.div_phi += phi_[j] * rt.div[j];
      out.grad_phi += phi_[j] * rt.grad_scale[j] * Mat2::Identity();
    }
    out.p = p_;
    return out;
  }

 private:
  CellGeometry geo_;
  std::array<double, 8> sigma_{};
  std::array<double, 2> u_{};
  std::array<double, 3> rho_{};
  std::array<double, 3> phi_{};
  double p_ = 0.0;
};

}  // namespace poroflow
