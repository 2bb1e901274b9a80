#include "mqt/elements.hpp"

#include <cmath>

namespace mqt {

std::string_view to_string(VectorSpaceKind kind) {
  return kind == VectorSpaceKind::RT0 ? "rt0" : "bdm1";
}

VectorSpaceKind parse_vector_space(std::string_view name) {
  if (name == "rt0" || name == "RT0") return VectorSpaceKind::RT0;
  if (name == "bdm1" || name == "BDM1") return VectorSpaceKind::BDM1;
  throw Error("unknown vector space '" + std::string(name) + "'");
}

double edge_moment_weight(int moment, double t) { return moment == 0 ? 1.0 : 2.0 * t - 1.0; }

Vec2 reference_vertex(int i) {
  switch (i) {
    case 0: return {0.0, 0.0};
    case 1: return {1.0, 0.0};
    case 2: return {0.0, 1.0};
    default: throw Error("reference_vertex: index out of range");
  }
}

namespace {

constexpr int kMonomials = 6;
constexpr int kEdgePoints = 6;

Eigen::Matrix<double, 2, kMonomials> monomial_values(const Vec2& xi) {
  Eigen::Matrix<double, 2, kMonomials> m = Eigen::Matrix<double, 2, kMonomials>::Zero();
  m(0, 0) = 1.0;
  m(1, 1) = 1.0;
  m(0, 2) = xi[0];
  m(0, 3) = xi[1];
  m(1, 4) = xi[0];
  m(1, 5) = xi[1];
  return m;
}

// Edge vector rotated clockwise: outward normal times edge length.
Vec2 reference_scaled_normal(int edge) {
  const Vec2 a = reference_vertex((edge + 1) % 3);
  const Vec2 b = reference_vertex((edge + 2) % 3);
  const Vec2 t = b - a;
  return {t[1], -t[0]};
}

Eigen::VectorXd reference_moments(const std::function<Vec2(const Vec2&)>& q, int moments) {
  const LineQuadrature g = gauss_legendre(kEdgePoints);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(3 * moments);
  for (int e = 0; e < 3; ++e) {
    const Vec2 a = reference_vertex((e + 1) % 3);
    const Vec2 b = reference_vertex((e + 2) % 3);
    const Vec2 n = reference_scaled_normal(e);
    for (std::size_t k = 0; k < g.points.size(); ++k) {
      const double t = g.points[k];
      const double flux = q(a + t * (b - a)).dot(n) * g.weights[k];
      for (int m = 0; m < moments; ++m) out[e * moments + m] += flux * edge_moment_weight(m, t);
    }
  }
  return out;
}

}  // namespace

VectorReferenceSpace::VectorReferenceSpace(VectorSpaceKind kind) : kind_(kind) {
  Eigen::MatrixXd prebasis;
  if (kind == VectorSpaceKind::RT0) {
    moments_ = 1;
    prebasis = Eigen::MatrixXd::Zero(3, kMonomials);
    prebasis(0, 0) = 1.0;
    prebasis(1, 1) = 1.0;
    prebasis(2, 2) = 1.0;
    prebasis(2, 5) = 1.0;
  } else {
    moments_ = 2;
    prebasis = Eigen::MatrixXd::Identity(kMonomials, kMonomials);
  }
  n_dofs_ = 3 * moments_;

  Eigen::MatrixXd dofs(n_dofs_, n_dofs_);
  for (int c = 0; c < n_dofs_; ++c) {
    const Eigen::VectorXd coeff = prebasis.row(c).transpose();
    dofs.col(c) = reference_moments([&](const Vec2& xi) -> Vec2 { return monomial_values(xi) * coeff; },
                                    moments_);
  }
  // Basis j = sum_c X(c, j) prebasis_c with dofs * X = I.
  const Eigen::MatrixXd x = dofs.fullPivLu().inverse();
  coefficients_ = x.transpose() * prebasis;

  div_.resize(n_dofs_);
  for (int j = 0; j < n_dofs_; ++j) div_[j] = coefficients_(j, 2) + coefficients_(j, 5);
}

Eigen::Matrix2Xd VectorReferenceSpace::values(const Vec2& xi) const {
  return monomial_values(xi) * coefficients_.transpose();
}

Eigen::MatrixXd VectorReferenceSpace::dof_matrix() const {
  Eigen::MatrixXd out(n_dofs_, n_dofs_);
  for (int j = 0; j < n_dofs_; ++j) {
    out.col(j) = apply_dofs([&](const Vec2& xi) -> Vec2 { return values(xi).col(j); });
  }
  return out;
}

Eigen::VectorXd VectorReferenceSpace::apply_dofs(const std::function<Vec2(const Vec2&)>& q) const {
  return reference_moments(q, moments_);
}

ScalarReferenceSpace::ScalarReferenceSpace(ScalarSpaceKind kind) : kind_(kind) {}

Eigen::VectorXd ScalarReferenceSpace::values(const Vec2& xi) const {
  if (kind_ == ScalarSpaceKind::P0) return Eigen::VectorXd::Ones(1);
  Eigen::VectorXd v(3);
  v << 1.0 - xi[0] - xi[1], xi[0], xi[1];
  return v;
}

Eigen::Matrix2Xd ScalarReferenceSpace::gradients() const {
  if (kind_ == ScalarSpaceKind::P0) return Eigen::Matrix2Xd::Zero(2, 1);
  Eigen::Matrix2Xd g(2, 3);
  g << -1.0, 1.0, 0.0,
       -1.0, 0.0, 1.0;
  return g;
}

AffineMap AffineMap::from_corners(const std::array<Vec3, 3>& corners) {
  AffineMap m;
  m.origin = corners[0];
  m.A.col(0) = corners[1] - corners[0];
  m.A.col(1) = corners[2] - corners[0];
  m.jac = m.A.col(0).cross(m.A.col(1)).norm();
  if (!(m.jac > 0.0)) throw Error("AffineMap: degenerate triangle");
  m.metric = m.A.transpose() * m.A;
  // det(A^T A) = jac^2 computed from the cross product avoids cancellation on
  // slivers.
  m.metric_inv << m.metric(1, 1), -m.metric(0, 1), -m.metric(1, 0), m.metric(0, 0);
  m.metric_inv /= m.jac * m.jac;
  return m;
}

Eigen::Matrix3Xd push_forward_vector(const AffineMap& map, const Eigen::Matrix2Xd& ref_values) {
  return map.A * ref_values / map.jac;
}

Vec3 scaled_conormal(const std::array<Vec3, 3>& corners, const Vec3& normal, int edge) {
  const Vec3 t = corners[static_cast<std::size_t>((edge + 2) % 3)] -
                 corners[static_cast<std::size_t>((edge + 1) % 3)];
  return t.cross(normal);
}

Eigen::VectorXd interpolate_local(const std::array<Vec3, 3>& corners, const Vec3& normal,
                                  const TangentField& q, const VectorReferenceSpace& space) {
  const int k = space.moments_per_edge();
  const LineQuadrature g = gauss_legendre(kEdgePoints);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(space.n_dofs());
  for (int e = 0; e < 3; ++e) {
    const Vec3& a = corners[static_cast<std::size_t>((e + 1) % 3)];
    const Vec3& b = corners[static_cast<std::size_t>((e + 2) % 3)];
    const Vec3 n = scaled_conormal(corners, normal, e);
    for (std::size_t i = 0; i < g.points.size(); ++i) {
      const double t = g.points[i];
      const double flux = q(a + t * (b - a)).dot(n) * g.weights[i];
      for (int m = 0; m < k; ++m) out[e * k + m] += flux * edge_moment_weight(m, t);
    }
  }
  return out;
}

std::size_t n_global_vector_dofs(const TraceMesh& mesh, const VectorReferenceSpace& space) {
  return mesh.n_edges() * static_cast<std::size_t>(space.moments_per_edge());
}

int local_dof_sign(const TraceMesh& mesh, const VectorReferenceSpace& space, Index t, int dof) {
  const int k = space.moments_per_edge();
  const int s = mesh.edge_signs[t][static_cast<std::size_t>(dof / k)];
  // Mean moments flip with the conormal; the linear moment also flips its
  // weight, so the two sign changes cancel.
  return (dof % k) == 0 ? s : 1;
}

Index global_dof_index(const TraceMesh& mesh, const VectorReferenceSpace& space, Index t, int dof) {
  const auto k = static_cast<Index>(space.moments_per_edge());
  return mesh.triangle_edges[t][static_cast<std::size_t>(dof) / k] * k + static_cast<Index>(dof) % k;
}

Eigen::VectorXd interpolate_Ih(const TraceMesh& mesh, const VectorReferenceSpace& space,
                               const FaceVectorField& q) {
  const auto k = static_cast<Index>(space.moments_per_edge());
  Eigen::VectorXd global = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_global_vector_dofs(mesh, space)));
  const LineQuadrature g = gauss_legendre(kEdgePoints);
  for (Index e = 0; e < mesh.n_edges(); ++e) {
    const Index t = mesh.edges[e].triangles[0];
    const auto corners = mesh.corners(t);
    std::size_t local = 0;
    while (mesh.triangle_edges[t][local] != e) ++local;
    const Vec3& a = corners[(local + 1) % 3];
    const Vec3& b = corners[(local + 2) % 3];
    const Vec3 n = scaled_conormal(corners, mesh.face_normals[t], static_cast<int>(local));
    for (std::size_t i = 0; i < g.points.size(); ++i) {
      const double tt = g.points[i];
      const double flux = q(t, a + tt * (b - a)).dot(n) * g.weights[i];
      for (Index m = 0; m < k; ++m) {
        global[static_cast<Eigen::Index>(e * k + m)] += flux * edge_moment_weight(static_cast<int>(m), tt);
      }
    }
  }
  return global;
}

Eigen::MatrixXd localize(const TraceMesh& mesh, const VectorReferenceSpace& space,
                         const Eigen::VectorXd& global) {
  const int nd = space.n_dofs();
  Eigen::MatrixXd local(static_cast<Eigen::Index>(mesh.n_triangles()), nd);
  for (Index t = 0; t < mesh.n_triangles(); ++t) {
    for (int j = 0; j < nd; ++j) {
      local(static_cast<Eigen::Index>(t), j) =
          local_dof_sign(mesh, space, t, j) *
          global[static_cast<Eigen::Index>(global_dof_index(mesh, space, t, j))];
    }
  }
  return local;
}

Vec3 evaluate_vector(const AffineMap& map, const VectorReferenceSpace& space,
                     const Eigen::VectorXd& coeffs, const Vec2& xi) {
  const Vec2 ref = space.values(xi) * coeffs;
  return map.A * ref / map.jac;
}

Eigen::VectorXd project_local(const std::array<Vec3, 3>& corners, const ScalarReferenceSpace& space,
                              const ScalarField& u, int degree) {
  const AffineMap map = AffineMap::from_corners(corners);
  const Quadrature q = triangle_rule(degree);
  const int n = space.n_dofs();
  Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (std::size_t i = 0; i < q.size(); ++i) {
    const Eigen::VectorXd phi = space.values(q.points[i]);
    const double w = q.weights[i] * map.jac;
    mass += w * phi * phi.transpose();
    rhs += w * u(map(q.points[i])) * phi;
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(mass);
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0.0)) {
    throw Error("project_pih: singular local mass matrix");
  }
  return ldlt.solve(rhs);
}

Eigen::MatrixXd project_pih(const TraceMesh& mesh, const ScalarReferenceSpace& space,
                            const ScalarField& u, int degree) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(mesh.n_triangles()), space.n_dofs());
  for (Index t = 0; t < mesh.n_triangles(); ++t) {
    out.row(static_cast<Eigen::Index>(t)) = project_local(mesh.corners(t), space, u, degree).transpose();
  }
  return out;
}

std::vector<double> interpolate_lagrange(const TraceMesh& mesh, const ScalarField& u) {
  std::vector<double> values;
  values.reserve(mesh.vertices.size());
  for (const Vec3& v : mesh.vertices) values.push_back(u(v));
  return values;
}

}  // namespace mqt
