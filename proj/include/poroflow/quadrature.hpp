#pragma once

// Symmetric positive-weight rules on the reference triangle (weights sum to
// its area 1/2), Gauss-Legendre rules on [0, 1] for edges, and one-level
// subdivision for cells next to a singular point.

#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace poroflow {

struct QuadratureRule {
  std::vector<std::array<double, 3>> points;  // barycentric
  std::vector<double> weights;
  int degree = 0;

  std::size_t size() const { return weights.size(); }
};

namespace detail {

struct TablePoint {
  double l0, l1, l2, w;
};

inline const std::map<int, std::vector<TablePoint>>& triangle_tables() {
  static const std::map<int, std::vector<TablePoint>> tables = {
    // degree 1: 1 point
    {1, {
      {0.3333333333333333, 0.3333333333333333, 0.3333333333333333, 0.5},
    }},
    // degree 2: 3 points
    {2, {
      {0.6666666666666665, 0.16666666666666677, 0.16666666666666677, 0.16666666666666666},
      {0.16666666666666677, 0.6666666666666665, 0.16666666666666677, 0.16666666666666666},
      {0.16666666666666677, 0.16666666666666677, 0.6666666666666665, 0.16666666666666666},
    }},
    // degree 4: 6 points
    {4, {
      {0.8168475729804583, 0.09157621350977083, 0.09157621350977083, 0.05497587182766096},
      {0.09157621350977083, 0.8168475729804583, 0.09157621350977083, 0.05497587182766096},
      {0.09157621350977083, 0.09157621350977083, 0.8168475729804583, 0.05497587182766096},
      {0.10810301816807011, 0.44594849091596495, 0.44594849091596495, 0.11169079483900571},
      {0.44594849091596495, 0.10810301816807011, 0.44594849091596495, 0.11169079483900571},
      {0.44594849091596495, 0.44594849091596495, 0.10810301816807011, 0.11169079483900571},
    }},
    // degree 5: 7 points
    {5, {
      {0.3333333333333333, 0.3333333333333333, 0.3333333333333333, 0.11250000000000426},
      {0.7974269853530869, 0.10128650732345659, 0.10128650732345659, 0.0629695902724138},
      {0.10128650732345659, 0.7974269853530869, 0.10128650732345659, 0.0629695902724138},
      {0.10128650732345659, 0.10128650732345659, 0.7974269853530869, 0.0629695902724138},
      {0.05971587178976678, 0.4701420641051166, 0.4701420641051166, 0.06619707639425143},
      {0.4701420641051166, 0.05971587178976678, 0.4701420641051166, 0.06619707639425143},
      {0.4701420641051166, 0.4701420641051166, 0.05971587178976678, 0.06619707639425143},
    }},
    // degree 6: 12 points
    {6, {
      {0.501426509658232, 0.249286745170884, 0.249286745170884, 0.058393137863211625},
      {0.249286745170884, 0.501426509658232, 0.249286745170884, 0.058393137863211625},
      {0.249286745170884, 0.249286745170884, 0.501426509658232, 0.058393137863211625},
      {0.8738219710169852, 0.0630890144915074, 0.0630890144915074, 0.02542245318510715},
      {0.0630890144915074, 0.8738219710169852, 0.0630890144915074, 0.02542245318510715},
      {0.0630890144915074, 0.0630890144915074, 0.8738219710169852, 0.02542245318510715},
      {0.3103524510338041, 0.6365024991213969, 0.053145049844799064, 0.041425537809173955},
      {0.6365024991213969, 0.053145049844799064, 0.3103524510338041, 0.041425537809173955},
      {0.053145049844799064, 0.3103524510338041, 0.6365024991213969, 0.041425537809173955},
      {0.6365024991213969, 0.3103524510338041, 0.053145049844799064, 0.041425537809173955},
      {0.3103524510338041, 0.053145049844799064, 0.6365024991213969, 0.041425537809173955},
      {0.053145049844799064, 0.6365024991213969, 0.3103524510338041, 0.041425537809173955},
    }},
    // degree 7: 15 points
    {7, {
      {0.8827600613275112, 0.05861996933624442, 0.05861996933624442, 0.021861366089449816},
      {0.05861996933624442, 0.8827600613275112, 0.05861996933624442, 0.021861366089449816},
      {0.05861996933624442, 0.05861996933624442, 0.8827600613275112, 0.021861366089449816},
      {0.17186780947982927, 0.41406609526008537, 0.41406609526008537, 0.056299654611377786},
      {0.41406609526008537, 0.17186780947982927, 0.41406609526008537, 0.056299654611377786},
      {0.41406609526008537, 0.41406609526008537, 0.17186780947982927, 0.056299654611377786},
      {0.6453734043082271, 0.17731329784588645, 0.17731329784588645, 0.03724284885531757},
      {0.17731329784588645, 0.6453734043082271, 0.17731329784588645, 0.03724284885531757},
      {0.17731329784588645, 0.17731329784588645, 0.6453734043082271, 0.03724284885531757},
      {0.02808149701669623, 0.6590810279080621, 0.3128374750752416, 0.02563139855526075},
      {0.6590810279080621, 0.3128374750752416, 0.02808149701669623, 0.02563139855526075},
      {0.3128374750752416, 0.02808149701669623, 0.6590810279080621, 0.02563139855526075},
      {0.6590810279080621, 0.02808149701669623, 0.3128374750752416, 0.02563139855526075},
      {0.02808149701669623, 0.3128374750752416, 0.6590810279080621, 0.02563139855526075},
      {0.3128374750752416, 0.6590810279080621, 0.02808149701669623, 0.02563139855526075},
    }},
    // degree 8: 16 points
    {8, {
      {0.3333333333333333, 0.3333333333333333, 0.3333333333333333, 0.07215780383888798},
      {0.6588613844965017, 0.17056930775174914, 0.17056930775174914, 0.05160868526736985},
      {0.17056930775174914, 0.6588613844965017, 0.17056930775174914, 0.05160868526736985},
      {0.17056930775174914, 0.17056930775174914, 0.6588613844965017, 0.05160868526736985},
      {0.08141482341456574, 0.45929258829271713, 0.45929258829271713, 0.04754581713364514},
      {0.45929258829271713, 0.08141482341456574, 0.45929258829271713, 0.04754581713364514},
      {0.45929258829271713, 0.45929258829271713, 0.08141482341456574, 0.04754581713364514},
      {0.8989055433659329, 0.050547228317033566, 0.050547228317033566, 0.01622924881160087},
      {0.050547228317033566, 0.8989055433659329, 0.050547228317033566, 0.01622924881160087},
      {0.050547228317033566, 0.050547228317033566, 0.8989055433659329, 0.01622924881160087},
      {0.263112829634683, 0.008394777409923445, 0.7284923929553936, 0.013615157087210747},
      {0.008394777409923445, 0.7284923929553936, 0.263112829634683, 0.013615157087210747},
      {0.7284923929553936, 0.263112829634683, 0.008394777409923445, 0.013615157087210747},
      {0.008394777409923445, 0.263112829634683, 0.7284923929553936, 0.013615157087210747},
      {0.263112829634683, 0.7284923929553936, 0.008394777409923445, 0.013615157087210747},
      {0.7284923929553936, 0.008394777409923445, 0.263112829634683, 0.013615157087210747},
    }},
    // degree 9: 19 points
    {9, {
      {0.3333333333333333, 0.3333333333333333, 0.3333333333333333, 0.04856789814187272},
      {0.020634961601429858, 0.48968251919928507, 0.48968251919928507, 0.01566735011309579},
      {0.48968251919928507, 0.020634961601429858, 0.48968251919928507, 0.01566735011309579},
      {0.48968251919928507, 0.48968251919928507, 0.020634961601429858, 0.01566735011309579},
      {0.12582081701259018, 0.4370895914937049, 0.4370895914937049, 0.03891377050260885},
      {0.4370895914937049, 0.12582081701259018, 0.4370895914937049, 0.03891377050260885},
      {0.4370895914937049, 0.4370895914937049, 0.12582081701259018, 0.03891377050260885},
      {0.6235929287612931, 0.18820353561935343, 0.18820353561935343, 0.03982386946358294},
      {0.18820353561935343, 0.6235929287612931, 0.18820353561935343, 0.03982386946358294},
      {0.18820353561935343, 0.18820353561935343, 0.6235929287612931, 0.03982386946358294},
      {0.9105409732111728, 0.04472951339441359, 0.04472951339441359, 0.012788837829327653},
      {0.04472951339441359, 0.9105409732111728, 0.04472951339441359, 0.012788837829327653},
      {0.04472951339441359, 0.04472951339441359, 0.9105409732111728, 0.012788837829327653},
      {0.036838412054890454, 0.221962989160577, 0.7411985987845325, 0.0216417696887136},
      {0.221962989160577, 0.7411985987845325, 0.036838412054890454, 0.0216417696887136},
      {0.7411985987845325, 0.036838412054890454, 0.221962989160577, 0.0216417696887136},
      {0.221962989160577, 0.036838412054890454, 0.7411985987845325, 0.0216417696887136},
      {0.036838412054890454, 0.7411985987845325, 0.221962989160577, 0.0216417696887136},
      {0.7411985987845325, 0.221962989160577, 0.036838412054890454, 0.0216417696887136},
    }},
    // degree 10: 25 points
    {10, {
      {0.3333333333333333, 0.3333333333333333, 0.3333333333333333, 0.045408995191065796},
      {0.028844733232674447, 0.4855776333836628, 0.4855776333836628, 0.018362978878224037},
      {0.4855776333836628, 0.028844733232674447, 0.4855776333836628, 0.018362978878224037},
      {0.4855776333836628, 0.4855776333836628, 0.028844733232674447, 0.018362978878224037},
      {0.7810368490294596, 0.1094815754852702, 0.1094815754852702, 0.022660529717780886},
      {0.1094815754852702, 0.7810368490294596, 0.1094815754852702, 0.022660529717780886},
      {0.1094815754852702, 0.1094815754852702, 0.7810368490294596, 0.022660529717780886},
      {0.1417072194152292, 0.30793983876433456, 0.5503529418204363, 0.0363789584226522},
      {0.30793983876433456, 0.5503529418204363, 0.1417072194152292, 0.0363789584226522},
      {0.5503529418204363, 0.1417072194152292, 0.30793983876433456, 0.0363789584226522},
      {0.30793983876433456, 0.1417072194152292, 0.5503529418204363, 0.0363789584226522},
      {0.1417072194152292, 0.5503529418204363, 0.30793983876433456, 0.0363789584226522},
      {0.5503529418204363, 0.30793983876433456, 0.1417072194152292, 0.0363789584226522},
      {0.02500353476293387, 0.24667256064019363, 0.7283239045968726, 0.014163621265605608},
      {0.24667256064019363, 0.7283239045968726, 0.02500353476293387, 0.014163621265605608},
      {0.7283239045968726, 0.02500353476293387, 0.24667256064019363, 0.014163621265605608},
      {0.24667256064019363, 0.02500353476293387, 0.7283239045968726, 0.014163621265605608},
      {0.02500353476293387, 0.7283239045968726, 0.24667256064019363, 0.014163621265605608},
      {0.7283239045968726, 0.24667256064019363, 0.02500353476293387, 0.014163621265605608},
      {0.009540815400298113, 0.06680325101245518, 0.9236559335872466, 0.0047108334818954335},
      {0.06680325101245518, 0.9236559335872466, 0.009540815400298113, 0.0047108334818954335},
      {0.9236559335872466, 0.009540815400298113, 0.06680325101245518, 0.0047108334818954335},
      {0.06680325101245518, 0.009540815400298113, 0.9236559335872466, 0.0047108334818954335},
      {0.009540815400298113, 0.9236559335872466, 0.06680325101245518, 0.0047108334818954335},
      {0.9236559335872466, 0.06680325101245518, 0.009540815400298113, 0.0047108334818954335},
    }},
  };
  return tables;
}

}  // namespace detail

/// Lowest-cost tabulated rule exact for polynomials of total degree <= degree.
inline const QuadratureRule& quadrature(int degree) {
  if (degree < 1 || degree > 10)
    throw std::invalid_argument("quadrature: unsupported degree " + std::to_string(degree) + " (expected 1..10)");
  static const std::array<QuadratureRule, 11> rules = [] {
    std::array<QuadratureRule, 11> out;
    for (int d = 1; d <= 10; ++d) {
      auto it = detail::triangle_tables().lower_bound(d);
      QuadratureRule& q = out[d];
      q.degree = it->first;
      for (const auto& t : it->second) {
        q.points.push_back({t.l0, t.l1, t.l2});
        q.weights.push_back(t.w);
      }
    }
    return out;
  }();
  return rules[degree];
}

/// The rule applied on each of the four red-refinement children.
inline QuadratureRule subdivide(const QuadratureRule& rule) {
  using B = std::array<double, 3>;
  auto mid = [](const B& a, const B& b) { return B{0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])}; };
  const B v0{1, 0, 0}, v1{0, 1, 0}, v2{0, 0, 1};
  const B m0 = mid(v1, v2), m1 = mid(v0, v2), m2 = mid(v0, v1);
  const std::array<std::array<B, 3>, 4> children = {{{v0, m2, m1}, {m2, v1, m0}, {m1, m0, v2}, {m0, m1, m2}}};
  QuadratureRule out;
  out.degree = rule.degree;
  for (const auto& c : children)
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto& l = rule.points[q];
      B p{};
      for (int i = 0; i < 3; ++i) p[i] = l[0] * c[0][i] + l[1] * c[1][i] + l[2] * c[2][i];
      out.points.push_back(p);
      out.weights.push_back(0.25 * rule.weights[q]);
    }
  return out;
}

/// Gauss-Legendre rule on [0, 1] with weights summing to 1.
struct EdgeRule {
  std::vector<double> points;
  std::vector<double> weights;
  int degree = 0;
};

inline EdgeRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: need at least one point");
  EdgeRule rule;
  rule.degree = 2 * n - 1;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.points[n - 1 - i] = 0.5 * (x + 1.0);
    rule.weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

inline const EdgeRule& edge_quadrature(int degree) {
  if (degree < 1 || degree > 19)
    throw std::invalid_argument("edge_quadrature: unsupported degree " + std::to_string(degree));
  static const std::array<EdgeRule, 20> rules = [] {
    std::array<EdgeRule, 20> out;
    for (int d = 1; d < 20; ++d) out[d] = gauss_legendre((d + 2) / 2);
    return out;
  }();
  return rules[degree];
}

}  // namespace poroflow
