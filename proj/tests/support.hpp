#pragma once

#include "mqt/elements.hpp"
#include "mqt/geometry.hpp"
#include "mqt/quadrature.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

namespace mqt::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vec3 random_unit(Rng& rng) {
  std::normal_distribution<double> g;
  Vec3 v(g(rng), g(rng), g(rng));
  return v.normalized();
}

inline Mat3 random_rotation(Rng& rng) {
  std::normal_distribution<double> g;
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  return q.normalized().toRotationMatrix();
}

/// Needle-like triangle (0,0), (L,0), (s w, w) with L / w up to `max_aspect`,
/// randomly rotated, translated and cyclically relabelled. |s| <= 2 keeps the
/// largest angle below pi - atan(1/2).
inline std::array<Vec3, 3> random_anisotropic_triangle(Rng& rng, double max_aspect = 1e4) {
  const double length = std::exp(uniform(rng, std::log(0.05), std::log(2.0)));
  const double aspect = std::exp(uniform(rng, 0.0, std::log(max_aspect)));
  const double width = length / aspect;
  const double s = uniform(rng, -2.0, 2.0);
  std::array<Vec3, 3> c{Vec3(0, 0, 0), Vec3(length, 0, 0), Vec3(s * width, width, 0)};
  const Mat3 r = random_rotation(rng);
  const Vec3 shift(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1));
  for (Vec3& v : c) v = r * v + shift;
  std::rotate(c.begin(), c.begin() + static_cast<long>(rng() % 3), c.end());
  return c;
}

inline Vec3 unit_normal(const std::array<Vec3, 3>& c) {
  return (c[1] - c[0]).cross(c[2] - c[0]).normalized();
}

/// Quadratic tangential field a(s,t) e1 + b(s,t) e2 in in-plane coordinates
/// (s, t) of a triangle, with its exact divergence.
struct QuadraticField {
  Vec3 origin;
  Vec3 e1, e2;
  Eigen::Matrix<double, 6, 1> a, b;  // 1, s, t, s^2, s t, t^2
  double scale = 1.0;

  [[nodiscard]] Vec2 coords(const Vec3& x) const {
    const Vec3 y = (x - origin) / scale;
    return {y.dot(e1), y.dot(e2)};
  }
  [[nodiscard]] Vec3 operator()(const Vec3& x) const {
    const Vec2 st = coords(x);
    const double s = st[0], t = st[1];
    Eigen::Matrix<double, 6, 1> m;
    m << 1, s, t, s * s, s * t, t * t;
    return a.dot(m) * e1 + b.dot(m) * e2;
  }
  [[nodiscard]] double divergence(const Vec3& x) const {
    const Vec2 st = coords(x);
    const double s = st[0], t = st[1];
    const double da = a[1] + 2 * a[3] * s + a[4] * t;
    const double db = b[2] + b[4] * s + 2 * b[5] * t;
    return (da + db) / scale;
  }
};

inline QuadraticField random_quadratic_field(Rng& rng, const std::array<Vec3, 3>& c) {
  QuadraticField q;
  q.origin = c[0];
  q.e1 = (c[1] - c[0]).normalized();
  q.e2 = unit_normal(c).cross(q.e1);
  q.scale = std::max({(c[1] - c[0]).norm(), (c[2] - c[1]).norm(), (c[0] - c[2]).norm()});
  for (int i = 0; i < 6; ++i) {
    q.a[i] = uniform(rng, -1, 1);
    q.b[i] = uniform(rng, -1, 1);
  }
  return q;
}

/// Residual of int_T (div I_h q - div q), the full commuting-diagram defect
/// for the piecewise constant scalar space, relative to the boundary flux
/// magnitude int_dT |q . n|.
inline double commuting_diagram_residual(const std::array<Vec3, 3>& c, const QuadraticField& q,
                                         const VectorReferenceSpace& space) {
  const Vec3 normal = unit_normal(c);
  const Eigen::VectorXd coeffs = interpolate_local(c, normal, q, space);
  const AffineMap map = AffineMap::from_corners(c);
  const double interpolated = 0.5 * coeffs.dot(space.divergences());

  const Quadrature rule = triangle_rule(4);
  double exact = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) exact += rule.weights[i] * map.jac * q.divergence(map(rule.points[i]));

  const LineQuadrature g = gauss_legendre(4);
  double flux = 0.0;
  for (int e = 0; e < 3; ++e) {
    const Vec3 a = c[static_cast<std::size_t>((e + 1) % 3)];
    const Vec3 b = c[static_cast<std::size_t>((e + 2) % 3)];
    const Vec3 n = (b - a).cross(normal);
    for (std::size_t i = 0; i < g.points.size(); ++i) flux += g.weights[i] * std::abs(q(a + g.points[i] * (b - a)).dot(n));
  }
  return std::abs(interpolated - exact) / std::max(flux, 1e-300);
}

/// Random point within the tube of the unit sphere and a transversal face normal.
inline TangentFrame random_sphere_frame(Rng& rng, const SurfaceField& surface) {
  const Vec3 nu = random_unit(rng);
  const Vec3 x = uniform(rng, 0.7, 1.3) * nu;
  Vec3 nu_h;
  do {
    nu_h = (nu + uniform(rng, 0.0, 1.0) * random_unit(rng)).normalized();
  } while (nu_h.dot(nu) < 0.2);
  return make_frame(surface, x, nu_h);
}

}  // namespace mqt::testing
