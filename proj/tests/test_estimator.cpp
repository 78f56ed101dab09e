#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "support.hpp"

using namespace poroflow;

namespace {

SolverConfig tight() {
  SolverConfig c;
  c.tol = 1e-11;
  return c;
}

/// The polynomial case with u and p multiplied by t.
ManufacturedCase scaled_case(double t) {
  ManufacturedCase c = support::polynomial_case();
  const auto u = c.u;
  const auto p = c.p;
  c.u = [=](const Jet& x, const Jet& y) -> std::array<Jet, 2> {
    const auto v = u(x, y);
    return {t * v[0], t * v[1]};
  };
  c.p = [=](const Jet& x, const Jet& y) { return t * p(x, y); };
  return c;
}

MarkingConfig zeta(double z) {
  MarkingConfig m;
  m.zeta = z;
  return m;
}

}  // namespace

TEST(Estimator, VanishesOnExactlyRepresentedStates) {
  const ManufacturedCase c = constant_state_case(Mat2::Zero(), Vec2(0.3, -0.2), 0.7);
  for (const TriMesh& m : {unit_square_mesh(2), bisect_refine(unit_square_mesh(3), {2, 7})}) {
    const Solution s = solve(m, c, tight());
    EXPECT_LT(estimate(s, c).xi, 1e-9);
  }
}

TEST(Estimator, TermsAreNonNegativeAndSumToTheTotal) {
  const TriMesh m = unit_square_mesh(4);
  const ManufacturedCase c = example1_case();
  const EstimatorReport r = estimate(solve(m, c), c);
  ASSERT_EQ(static_cast<Index>(r.xi2.size()), m.num_cells());
  double total = 0.0;
  for (Index k = 0; k < m.num_cells(); ++k) {
    double s = 0.0, f = 0.0;
    for (double t : r.solid_terms[k]) {
      EXPECT_GE(t, 0.0);
      s += t;
    }
    for (double t : r.fluid_terms[k]) {
      EXPECT_GE(t, 0.0);
      f += t;
    }
    EXPECT_NEAR(r.xi_s2[k], s, 1e-14 * std::max(1.0, s));
    EXPECT_NEAR(r.xi_f2[k], f, 1e-14 * std::max(1.0, f));
    EXPECT_NEAR(r.xi2[k], s + f, 1e-14 * std::max(1.0, s + f));
    total += r.xi2[k];
  }
  EXPECT_NEAR(r.xi, std::sqrt(total), 1e-12 * r.xi);
  EXPECT_EQ(estimate_solid(solve(m, c), c), r.xi_s2);
  EXPECT_EQ(estimate_fluid(solve(m, c), c), r.xi_f2);
}

TEST(Estimator, ScalesLinearlyForLinearProblems) {
  const TriMesh m = unit_square_mesh(3);
  const ManufacturedCase base = scaled_case(1.0);
  const double xi = estimate(solve(m, base, tight()), base).xi;
  ASSERT_GT(xi, 0.0);
  for (double t : {2.0, -3.0, 0.25}) {
    const ManufacturedCase c = scaled_case(t);
    EXPECT_NEAR(estimate(solve(m, c, tight()), c).xi, std::abs(t) * xi, 1e-8 * std::abs(t) * xi);
  }
}

TEST(Estimator, EfficiencyIsBoundedOnTheSmoothCase) {
  StudyConfig cfg;
  const std::vector<LevelRecord> levels = convergence_study(example1_case(), unit_square_mesh(2), cfg, 5);
  for (std::size_t l = 2; l < levels.size(); ++l) {
    EXPECT_GE(levels[l].efficiency(), 0.5);
    EXPECT_LE(levels[l].efficiency(), 1.5);
  }
  double lo = 1e300, hi = 0.0;
  for (std::size_t l = levels.size() - 3; l < levels.size(); ++l) {
    lo = std::min(lo, levels[l].efficiency());
    hi = std::max(hi, levels[l].efficiency());
  }
  EXPECT_LT((hi - lo) / lo, 0.1);
}

TEST(Efficiency, Index) {
  EXPECT_DOUBLE_EQ(efficiency_index(2.0, 4.0), 0.5);
  EXPECT_TRUE(std::isnan(efficiency_index(0.0, 0.0)));
  EXPECT_EQ(efficiency_index(0.0, 1.0), 0.0);
  EXPECT_THROW(efficiency_index(1.0, 0.0), std::domain_error);
}

TEST(Marking, DorflerExamples) {
  EXPECT_EQ(dorfler_mark({4, 1, 1, 1, 1}, zeta(0.5)), std::vector<Index>{0});
  EXPECT_EQ(dorfler_mark(std::vector<double>(10, 1.0), zeta(0.3)), (std::vector<Index>{0, 1, 2}));
  EXPECT_EQ(dorfler_mark({1, 3, 2}, zeta(1.0)), (std::vector<Index>{0, 1, 2}));
  EXPECT_EQ(dorfler_mark({1, 3, 2}, zeta(0.5)), (std::vector<Index>{1}));
  EXPECT_EQ(dorfler_mark({1, 3, 2}, zeta(0.6)), (std::vector<Index>{1, 2}));
  // ties are broken by index
  EXPECT_EQ(dorfler_mark({2, 5, 2, 2}, zeta(0.6)), (std::vector<Index>{0, 1}));
  EXPECT_EQ(dorfler_mark({2, 5, 2, 2}, zeta(0.7)), (std::vector<Index>{0, 1, 2}));
  // all-zero indicators still mark one cell
  EXPECT_EQ(dorfler_mark({0, 0, 0}, zeta(0.5)), std::vector<Index>{0});
}

TEST(Marking, DorflerSetIsMinimal) {
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> xi2(40);
    for (double& v : xi2) v = std::pow(u(rng), 4);
    const double z = 0.05 + 0.9 * u(rng);
    const std::vector<Index> marked = dorfler_mark(xi2, zeta(z));
    const double total = std::accumulate(xi2.begin(), xi2.end(), 0.0);
    double sum = 0.0, smallest = 1e300;
    for (Index k : marked) {
      sum += xi2[k];
      smallest = std::min(smallest, xi2[k]);
    }
    EXPECT_GE(sum, z * total);
    // no set with one fewer cell reaches the bulk: dropping the smallest marked entry fails
    EXPECT_LT(sum - smallest, z * total);
    for (Index k = 0; k < 40; ++k) {
      if (std::find(marked.begin(), marked.end(), k) == marked.end()) {
        EXPECT_LE(xi2[k], smallest);
      }
    }
  }
}

TEST(Marking, ThresholdContainsDorflerAndLargeShares) {
  const std::vector<double> xi2{5, 0.2, 3, 0.1, 3};
  const std::vector<Index> t = threshold_mark(xi2, zeta(0.2));
  EXPECT_EQ(t, (std::vector<Index>{0, 2, 4}));
  EXPECT_EQ(threshold_mark(xi2, zeta(0.9)), dorfler_mark(xi2, zeta(0.9)));
  EXPECT_EQ(threshold_mark({1, 1, 1, 1}, zeta(1e-3)), (std::vector<Index>{0, 1, 2, 3}));
}

TEST(Marking, RejectsInvalidInput) {
  EXPECT_THROW(dorfler_mark({1.0}, zeta(0.0)), std::invalid_argument);
  EXPECT_THROW(dorfler_mark({1.0}, zeta(1.5)), std::invalid_argument);
  EXPECT_THROW(dorfler_mark({}, zeta(0.5)), std::invalid_argument);
  EXPECT_THROW(threshold_mark({1.0}, zeta(-1.0)), std::invalid_argument);
}

TEST(Adaptive, MarkingEverythingMatchesUniformRates) {
  const ManufacturedCase c = example1_case();
  StudyConfig uni;
  StudyConfig ada;
  ada.marking = zeta(1.0);
  ada.strategy = MarkingStrategy::Dorfler;
  ada.refinement = BisectionRule::Bisec3;
  const auto u = convergence_rates(error_history(convergence_study(c, unit_square_mesh(2), uni, 4)), RateMode::Dofs);
  const auto a = convergence_rates(error_history(adaptive_loop(c, unit_square_mesh(2), ada, 4)), RateMode::Dofs);
  EXPECT_NEAR(a.back().total, u.back().total, 0.1);
}

TEST(Adaptive, RefinementConcentratesAtTheReentrantCorner) {
  const ManufacturedCase c = example3_case();
  StudyConfig cfg;
  cfg.marking = zeta(9.5e-5);
  cfg.strategy = MarkingStrategy::Dorfler;
  cfg.refinement = BisectionRule::Bisec3;
  const TriMesh initial = lshape_mesh(2);
  const std::vector<LevelRecord> levels = adaptive_loop(c, initial, cfg, 6);
  const TriMesh& last = levels.back().mesh();
  const Index added = last.num_vertices() - initial.num_vertices();
  ASSERT_GT(added, 0);
  Index near = 0;
  for (Index v = initial.num_vertices(); v < last.num_vertices(); ++v)
    if (last.vertex(v).norm() < 0.25) ++near;
  EXPECT_GT(static_cast<double>(near) / added, 0.3);
  for (std::size_t l = 1; l < levels.size(); ++l)
    EXPECT_GT(levels[l].solution.dofs(), levels[l - 1].solution.dofs());
}
