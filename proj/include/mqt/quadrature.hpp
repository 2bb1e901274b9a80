#pragma once

#include "mqt/types.hpp"

#include <vector>

namespace mqt {

/// Gauss-Legendre rule on [0, 1]; weights sum to 1.
struct LineQuadrature {
  std::vector<double> points;
  std::vector<double> weights;
};

LineQuadrature gauss_legendre(int n_points);

/// Rule on the reference triangle conv{(0,0), (1,0), (0,1)}.
///
/// Points are stored as reference coordinates (xi, eta); the barycentric
/// weights are (1 - xi - eta, xi, eta). Weights sum to the reference area 1/2.
/// The rule is a collapsed (Duffy) tensor product of Gauss-Legendre rules and
/// is exact for every polynomial of total degree <= `degree`.
struct Quadrature {
  int degree = 0;
  std::vector<Vec2> points;
  std::vector<double> weights;

  [[nodiscard]] std::size_t size() const { return points.size(); }
};

Quadrature triangle_rule(int degree);

/// Assembly and error-integration degrees used throughout the library.
inline constexpr int kAssemblyDegree = 4;
inline constexpr int kErrorDegree = 6;

}  // namespace mqt
