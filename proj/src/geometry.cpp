#include "mqt/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace mqt {

Sphere::Sphere(double radius) : radius_(radius) {
  if (!(radius > 0.0)) throw Error("Sphere: radius must be positive");
}

double Sphere::signed_distance(const Vec3& x) const { return x.norm() - radius_; }

Vec3 Sphere::gradient(const Vec3& x) const {
  const double r = x.norm();
  if (r == 0.0) throw Error("Sphere: normal undefined at the centre");
  return x / r;
}

Mat3 Sphere::hessian(const Vec3& x) const {
  const double r = x.norm();
  if (r == 0.0) throw Error("Sphere: Weingarten map undefined at the centre");
  const Vec3 n = x / r;
  return (Mat3::Identity() - n * n.transpose()) / r;
}

TangentFrame make_frame(const SurfaceField& surface, const Vec3& x, const Vec3& nu_h) {
  TangentFrame f;
  f.x = x;
  f.d = surface.signed_distance(x);
  f.nu = surface.gradient(x);
  f.H = surface.hessian(x);
  f.point_on_surface = x - f.d * f.nu;
  f.nu_h = nu_h.normalized();
  f.Pi = Mat3::Identity() - f.nu * f.nu.transpose();
  f.Pi_h = Mat3::Identity() - f.nu_h * f.nu_h.transpose();

  const double kappa_max = symmetric_norm(surface.hessian(f.point_on_surface));
  if (kappa_max > 0.0 && std::abs(f.d) >= 0.5 / kappa_max) {
    throw Error("make_frame: point outside the tubular neighbourhood (|d| = " +
                std::to_string(std::abs(f.d)) + ")");
  }
  return f;
}

double curvature_factor(const TangentFrame& frame) {
  const double tr = frame.H.trace();
  const double tr2 = (frame.H * frame.H).trace();
  const double d = frame.d;
  return 1.0 - d * tr + d * d * 0.5 * (tr * tr - tr2);
}

double area_ratio_mu(const TangentFrame& frame) {
  const double c = frame.transversality();
  if (!(c > 0.0)) throw Error("area_ratio_mu: face not transverse to the surface (nu . nu_h <= 0)");
  return c * curvature_factor(frame);
}

Vec3 piola_to_gamma(const TangentFrame& frame, const Vec3& p_h) {
  const double mu = area_ratio_mu(frame);
  return (frame.Pi - frame.d * frame.H) * p_h / mu;
}

namespace {

Mat3 inverse_shift(const TangentFrame& frame) {
  const Mat3 m = Mat3::Identity() - frame.d * frame.H;
  Eigen::FullPivLU<Mat3> lu(m);
  if (!lu.isInvertible()) throw Error("piola_from_gamma: I - dH is singular");
  return lu.inverse();
}

// I - (nu (x) nu_h) / (nu . nu_h)
Mat3 oblique_projector(const TangentFrame& frame) {
  return Mat3::Identity() - frame.nu * frame.nu_h.transpose() / frame.transversality();
}

}  // namespace

Vec3 piola_from_gamma(const TangentFrame& frame, const Vec3& p) {
  const double mu = area_ratio_mu(frame);
  return mu * oblique_projector(frame) * (inverse_shift(frame) * p);
}

Mat3 geometric_matrix_Bh(const TangentFrame& frame) {
  const double mu = area_ratio_mu(frame);
  const Mat3 inv = inverse_shift(frame);
  const Mat3 p = oblique_projector(frame);
  const Mat3 half = p * inv * frame.Pi;
  Mat3 b = mu * half.transpose() * half;
  return 0.5 * (b + b.transpose());
}

double symmetric_norm(const Mat3& m) {
  Eigen::SelfAdjointEigenSolver<Mat3> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double lift_scalar(const SurfaceField& surface,
                   const std::function<double(const Vec3&)>& u_on_surface,
                   const Vec3& x) {
  return u_on_surface(surface.closest_point(x));
}

}  // namespace mqt
