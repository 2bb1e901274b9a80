#pragma once

#include "mqt/types.hpp"

#include <functional>
#include <memory>

namespace mqt {

/// Smooth closed surface described through its signed distance function.
///
/// Implementations must be pure: all queries are safe to call concurrently.
class SurfaceField {
 public:
  virtual ~SurfaceField() = default;

  [[nodiscard]] virtual double signed_distance(const Vec3& x) const = 0;
  /// Unit normal nu = grad d, constant along normal lines.
  [[nodiscard]] virtual Vec3 gradient(const Vec3& x) const = 0;
  /// Weingarten map H = D^2 d; nu is a zero eigenvector.
  [[nodiscard]] virtual Mat3 hessian(const Vec3& x) const = 0;

  [[nodiscard]] Vec3 closest_point(const Vec3& x) const {
    return x - signed_distance(x) * gradient(x);
  }
};

/// Sphere of given radius centred at the origin.
class Sphere final : public SurfaceField {
 public:
  explicit Sphere(double radius = 1.0);

  [[nodiscard]] double radius() const { return radius_; }

  [[nodiscard]] double signed_distance(const Vec3& x) const override;
  [[nodiscard]] Vec3 gradient(const Vec3& x) const override;
  [[nodiscard]] Mat3 hessian(const Vec3& x) const override;

 private:
  double radius_;
};

/// Local geometric data at a point x of the discrete surface, relating the
/// face through x (unit normal nu_h) to the smooth surface at P_d(x).
struct TangentFrame {
  Vec3 x;             ///< point on the discrete surface
  Vec3 point_on_surface;
  Vec3 nu;
  Vec3 nu_h;
  double d = 0.0;
  Mat3 H;
  Mat3 Pi;            ///< I - nu nu^T
  Mat3 Pi_h;          ///< I - nu_h nu_h^T

  [[nodiscard]] double transversality() const { return nu.dot(nu_h); }
};

/// Builds the frame at x for a face with unit normal nu_h.
///
/// Throws if x lies outside the tubular neighbourhood, i.e. if
/// |d| >= 0.5 / max |kappa_i|.
TangentFrame make_frame(const SurfaceField& surface, const Vec3& x, const Vec3& nu_h);

/// (1 - d k1)(1 - d k2) evaluated through traces of H.
double curvature_factor(const TangentFrame& frame);

/// Area ratio mu = (nu . nu_h)(1 - d k1)(1 - d k2), so that
/// int_Gamma f mu = int_gamma f^l.
double area_ratio_mu(const TangentFrame& frame);

/// Divergence-preserving transfer of a field tangent to the face onto the
/// tangent plane of the smooth surface at P_d(x).
Vec3 piola_to_gamma(const TangentFrame& frame, const Vec3& p_h);

/// Inverse of piola_to_gamma: a field tangent to the smooth surface mapped to
/// the face tangent plane.
Vec3 piola_from_gamma(const TangentFrame& frame, const Vec3& p);

/// Geometric consistency matrix B_h; a(p, q) - a_Gamma(p~, q~) = a((Pi - B_h) p, q).
Mat3 geometric_matrix_Bh(const TangentFrame& frame);

/// Spectral norm of a symmetric 3x3 matrix.
double symmetric_norm(const Mat3& m);

/// u^l(x) = u(P_d(x)).
double lift_scalar(const SurfaceField& surface,
                   const std::function<double(const Vec3&)>& u_on_surface,
                   const Vec3& x);

}  // namespace mqt
