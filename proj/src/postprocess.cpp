#include "mqt/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mqt {

namespace {

Eigen::Index as_index(std::size_t i) { return static_cast<Eigen::Index>(i); }

struct PlaneFrame {
  Vec3 centroid;
  Vec3 e1;
  Vec3 e2;
  double area = 0.0;
};

PlaneFrame plane_frame(const std::array<Vec3, 3>& c, const Vec3& normal) {
  PlaneFrame f;
  f.centroid = (c[0] + c[1] + c[2]) / 3.0;
  f.e1 = (c[1] - c[0]).normalized();
  f.e2 = normal.cross(f.e1).normalized();
  f.area = 0.5 * (c[1] - c[0]).cross(c[2] - c[0]).norm();
  return f;
}

// Mean-zero P1 test functions v_k = e_k . (x - centroid) span P1^0(T), and
// int grad u* . grad v_k = |T| g_k for u* with tangential gradient g.
LocalP1 finish(const std::array<Vec3, 3>& corners, const PlaneFrame& f, double mean, const Vec2& rhs) {
  LocalP1 out;
  out.centroid = f.centroid;
  out.mean = mean;
  out.gradient = (rhs[0] * f.e1 + rhs[1] * f.e2) / f.area;
  for (std::size_t i = 0; i < 3; ++i) out.vertex_values[i] = out(corners[i]);
  return out;
}

}  // namespace

ManufacturedProblem manufactured_sphere() {
  ManufacturedProblem mp;
  mp.u = [](const Vec3& x) { return std::sin(x[0]) + x[1] + x[2] * x[2] * x[2]; };
  mp.grad_u = [](const Vec3& x) -> Vec3 {
    const Vec3 nu = x.normalized();
    const Vec3 g(std::cos(x[0]), 1.0, 3.0 * x[2] * x[2]);
    return g - nu.dot(g) * nu;
  };
  // Laplace-Beltrami on the unit sphere: Delta u - 2 d_nu u - d_nu^2 u.
  mp.f = [](const Vec3& x) {
    const Vec3 nu = x.normalized();
    const Vec3 g(std::cos(x[0]), 1.0, 3.0 * x[2] * x[2]);
    const Vec3 hess_diag(-std::sin(x[0]), 0.0, 6.0 * x[2]);
    const double laplace = hess_diag.sum();
    const double dn = nu.dot(g);
    const double dnn = nu.cwiseProduct(nu).dot(hess_diag);
    return -(laplace - 2.0 * dn - dnn);
  };
  return mp;
}

std::string_view to_string(PostprocessVariant v) {
  return v == PostprocessVariant::Neumann ? "neumann" : "gradient";
}

LocalP1 postprocess_neumann(const std::array<Vec3, 3>& corners, const Vec3& normal,
                            const VectorReferenceSpace& space, const Eigen::VectorXd& p_coeffs,
                            double u_value, const std::function<double(const Vec3&)>& load) {
  const AffineMap map = AffineMap::from_corners(corners);
  const PlaneFrame f = plane_frame(corners, normal);
  Vec2 rhs = Vec2::Zero();

  const Quadrature q = triangle_rule(kErrorDegree);
  if (load) {
    for (std::size_t i = 0; i < q.size(); ++i) {
      const Vec3 x = map(q.points[i]);
      const Vec3 r = x - f.centroid;
      const double w = q.weights[i] * map.jac * load(x);
      rhs += w * Vec2(f.e1.dot(r), f.e2.dot(r));
    }
  }
  const LineQuadrature g = gauss_legendre(4);
  for (int e = 0; e < 3; ++e) {
    const Vec2 a = reference_vertex((e + 1) % 3);
    const Vec2 b = reference_vertex((e + 2) % 3);
    const Vec3 n = scaled_conormal(corners, normal, e);
    for (std::size_t i = 0; i < g.points.size(); ++i) {
      const Vec2 xi = a + g.points[i] * (b - a);
      const Vec3 r = map(xi) - f.centroid;
      const double flux = evaluate_vector(map, space, p_coeffs, xi).dot(n) * g.weights[i];
      rhs -= flux * Vec2(f.e1.dot(r), f.e2.dot(r));
    }
  }
  if (!(f.area > 0.0)) throw Error("postprocess_neumann: degenerate triangle");
  return finish(corners, f, u_value, rhs);
}

LocalP1 postprocess_gradient(const std::array<Vec3, 3>& corners, const Vec3& normal,
                             const VectorReferenceSpace& space, const Eigen::VectorXd& p_coeffs,
                             double u_value) {
  const AffineMap map = AffineMap::from_corners(corners);
  const PlaneFrame f = plane_frame(corners, normal);
  Vec2 rhs = Vec2::Zero();
  const Quadrature q = triangle_rule(2);
  for (std::size_t i = 0; i < q.size(); ++i) {
    const Vec3 p = evaluate_vector(map, space, p_coeffs, q.points[i]);
    rhs -= q.weights[i] * map.jac * Vec2(p.dot(f.e1), p.dot(f.e2));
  }
  if (!(f.area > 0.0)) throw Error("postprocess_gradient: degenerate triangle");
  return finish(corners, f, u_value, rhs);
}

std::vector<LocalP1> postprocess(const TraceMesh& mesh, const VectorReferenceSpace& space,
                                 const SolutionFields& fields, const RightHandSide& f_h,
                                 PostprocessVariant variant) {
  std::vector<LocalP1> out;
  out.reserve(mesh.n_triangles());
  for (Index t = 0; t < mesh.n_triangles(); ++t) {
    const Eigen::VectorXd coeffs = fields.p.row(as_index(t)).transpose();
    const double u = fields.u[as_index(t)];
    if (variant == PostprocessVariant::Neumann) {
      out.push_back(postprocess_neumann(mesh.corners(t), mesh.face_normals[t], space, coeffs, u,
                                        [&](const Vec3& x) { return f_h.lifted(t, x); }));
    } else {
      out.push_back(postprocess_gradient(mesh.corners(t), mesh.face_normals[t], space, coeffs, u));
    }
  }
  return out;
}

double postprocessed_error(const TraceMesh& mesh, const SurfaceField& surface, const ScalarField& u,
                           const std::vector<LocalP1>& post, int degree) {
  const Quadrature q = triangle_rule(degree);
  double e2 = 0.0;
  for (Index t = 0; t < mesh.n_triangles(); ++t) {
    const AffineMap map = AffineMap::from_corners(mesh.corners(t));
    for (std::size_t i = 0; i < q.size(); ++i) {
      const Vec3 x = map(q.points[i]);
      const double d = lift_scalar(surface, u, x) - post[t](x);
      e2 += q.weights[i] * map.jac * d * d;
    }
  }
  return std::sqrt(e2);
}

ErrorRow compute_errors(const TraceMesh& mesh, const SurfaceField& surface, const VectorReferenceSpace& space,
                        const ManufacturedProblem& problem, const SolutionFields& fields,
                        const RightHandSide& f_h, const ErrorOptions& options) {
  const Quadrature q = triangle_rule(options.degree);
  ErrorRow row;
  row.h = mesh.h_bulk > 0.0 ? mesh.h_bulk : mesh.h;
  row.n_triangles = mesh.n_triangles();
  const std::vector<LocalP1> post = postprocess(mesh, space, fields, f_h, options.variant);

  double ep = 0.0;
  double eu = 0.0;
  double eeu = 0.0;
  double epost = 0.0;
  for (Index t = 0; t < mesh.n_triangles(); ++t) {
    const AffineMap map = AffineMap::from_corners(mesh.corners(t));
    const Vec3& nu_h = mesh.face_normals[t];
    const Eigen::VectorXd coeffs = fields.p.row(as_index(t)).transpose();
    const double uh = fields.u[as_index(t)];
    double mean_u = 0.0;
    double eu_t = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
      const Vec3 x = map(q.points[i]);
      const double w = q.weights[i] * map.jac;
      const TangentFrame frame = make_frame(surface, x, nu_h);
      const Vec3 p_exact = problem.p(frame.point_on_surface);
      const Vec3 p_tilde = options.naive_vector_lift ? Vec3(frame.Pi_h * p_exact) : piola_from_gamma(frame, p_exact);
      ep += w * (p_tilde - evaluate_vector(map, space, coeffs, q.points[i])).squaredNorm();
      const double ul = problem.u(frame.point_on_surface);
      mean_u += w * ul;
      eu_t += w * (ul - uh) * (ul - uh);
      const double dp = ul - post[t](x);
      epost += w * dp * dp;
    }
    const double area = 0.5 * map.jac;
    mean_u /= area;
    eu += eu_t;
    eeu += area * (mean_u - uh) * (mean_u - uh);
  }
  row.err_p = std::sqrt(ep);
  row.err_u = std::sqrt(eu);
  row.err_eu = std::sqrt(eeu);
  row.err_post = std::sqrt(epost);
  return row;
}

SolutionFields interpolated_exact_fields(const TraceMesh& mesh, const SurfaceField& surface,
                                         const VectorReferenceSpace& space, const ManufacturedProblem& problem) {
  SolutionFields out;
  out.space = space.kind();
  const Eigen::VectorXd global = interpolate_Ih(mesh, space, [&](Index t, const Vec3& x) {
    const TangentFrame frame = make_frame(surface, x, mesh.face_normals[t]);
    return piola_from_gamma(frame, problem.p(frame.point_on_surface));
  });
  out.p = localize(mesh, space, global);
  const ScalarReferenceSpace p0(ScalarSpaceKind::P0);
  out.u = project_pih(mesh, p0, [&](const Vec3& x) { return lift_scalar(surface, problem.u, x); }).col(0);
  return out;
}

double lagrange_interpolation_error(const TraceMesh& mesh, const SurfaceField& surface, const ScalarField& u,
                                    int degree) {
  const auto lifted = [&](const Vec3& x) { return lift_scalar(surface, u, x); };
  const std::vector<double> nodal = interpolate_lagrange(mesh, lifted);
  const ScalarReferenceSpace p1(ScalarSpaceKind::P1);
  const Quadrature q = triangle_rule(degree);
  double e2 = 0.0;
  for (Index t = 0; t < mesh.n_triangles(); ++t) {
    const AffineMap map = AffineMap::from_corners(mesh.corners(t));
    const auto& tri = mesh.triangles[t];
    const Eigen::Vector3d c(nodal[tri[0]], nodal[tri[1]], nodal[tri[2]]);
    for (std::size_t i = 0; i < q.size(); ++i) {
      const double d = lifted(map(q.points[i])) - p1.values(q.points[i]).dot(c);
      e2 += q.weights[i] * map.jac * d * d;
    }
  }
  return std::sqrt(e2);
}

GeometricDiagnostics geometric_diagnostics(const TraceMesh& mesh, const SurfaceField& surface, int degree) {
  const Quadrature q = triangle_rule(degree);
  GeometricDiagnostics g;
  g.min_mu = std::numeric_limits<double>::infinity();
  for (Index t = 0; t < mesh.n_triangles(); ++t) {
    const AffineMap map = AffineMap::from_corners(mesh.corners(t));
    for (const Vec2& xi : q.points) {
      const TangentFrame frame = make_frame(surface, map(xi), mesh.face_normals[t]);
      const double mu = area_ratio_mu(frame);
      g.min_mu = std::min(g.min_mu, mu);
      g.max_mu_deviation = std::max(g.max_mu_deviation, std::abs(1.0 - mu));
      g.max_bh_deviation = std::max(g.max_bh_deviation, symmetric_norm(frame.Pi - geometric_matrix_Bh(frame)));
    }
  }
  return g;
}

std::vector<std::optional<double>> eoc(const std::vector<double>& errors, const std::vector<double>& hs) {
  if (errors.size() != hs.size()) throw Error("eoc: errors and mesh sizes differ in length");
  std::vector<std::optional<double>> rates;
  for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
    const double e0 = errors[i];
    const double e1 = errors[i + 1];
    const double h0 = hs[i];
    const double h1 = hs[i + 1];
    if (!(e0 > 0.0) || !(e1 > 0.0) || !(h0 > 0.0) || !(h1 > 0.0) || h0 == h1) {
      rates.emplace_back(std::nullopt);
    } else {
      rates.emplace_back(std::log(e0 / e1) / std::log(h0 / h1));
    }
  }
  return rates;
}

}  // namespace mqt
