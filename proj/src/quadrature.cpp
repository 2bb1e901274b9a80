#include "mqt/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace mqt {

LineQuadrature gauss_legendre(int n_points) {
  if (n_points < 1) throw Error("gauss_legendre: need at least one point");
  const auto n = static_cast<std::size_t>(n_points);
  LineQuadrature rule;
  rule.points.resize(n);
  rule.weights.resize(n);

  // Newton iteration on P_n over [-1, 1], then map to [0, 1].
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double kd = static_cast<double>(k);
        const double p2 = ((2.0 * kd - 1.0) * x * p1 - (kd - 1.0) * p0) / kd;
        p0 = p1;
        p1 = p2;
      }
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.points[i] = 0.5 * (1.0 - x);
    rule.points[n - 1 - i] = 0.5 * (1.0 + x);
    rule.weights[i] = 0.5 * w;
    rule.weights[n - 1 - i] = 0.5 * w;
  }
  if (n == 1) {
    rule.points[0] = 0.5;
    rule.weights[0] = 1.0;
  }
  return rule;
}

Quadrature triangle_rule(int degree) {
  if (degree < 0) throw Error("triangle_rule: negative degree");
  // Collapsing (u, v) -> (u, v (1 - u)) raises the degree in u by one.
  const int n = (degree + 3) / 2;
  const LineQuadrature g = gauss_legendre(n);
  Quadrature q;
  q.degree = degree;
  q.points.reserve(g.points.size() * g.points.size());
  q.weights.reserve(g.points.size() * g.points.size());
  for (std::size_t i = 0; i < g.points.size(); ++i) {
    const double u = g.points[i];
    for (std::size_t j = 0; j < g.points.size(); ++j) {
      const double v = g.points[j];
      q.points.emplace_back(u, v * (1.0 - u));
      q.weights.push_back(g.weights[i] * g.weights[j] * (1.0 - u));
    }
  }
  return q;
}

}  // namespace mqt
