#pragma once

#include "mqt/quadrature.hpp"
#include "mqt/trace_mesh.hpp"
#include "mqt/types.hpp"

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace mqt {

enum class VectorSpaceKind { RT0, BDM1 };
enum class ScalarSpaceKind { P0, P1 };

std::string_view to_string(VectorSpaceKind kind);
VectorSpaceKind parse_vector_space(std::string_view name);

/// Weight functions for the normal moments on an edge, in the edge
/// parameter t in [0, 1]: psi_0 = 1, psi_1 = 2t - 1.
double edge_moment_weight(int moment, double t);

/// Reference vertices (0,0), (1,0), (0,1). Local edge i is opposite vertex i
/// and runs from vertex (i+1)%3 to vertex (i+2)%3.
Vec2 reference_vertex(int i);

/// H(div) reference element (RT0 or BDM1) with edge-moment degrees of freedom.
///
/// Local DOF index = edge * moments_per_edge + moment. The basis is dual to
/// the functionals  l_{i,m}(q) = int_{e_i} q . n_i psi_m ds.
class VectorReferenceSpace {
 public:
  explicit VectorReferenceSpace(VectorSpaceKind kind);

  [[nodiscard]] VectorSpaceKind kind() const { return kind_; }
  [[nodiscard]] int n_dofs() const { return n_dofs_; }
  [[nodiscard]] int moments_per_edge() const { return moments_; }

  /// 2 x n_dofs matrix of basis values at reference point xi.
  [[nodiscard]] Eigen::Matrix2Xd values(const Vec2& xi) const;
  /// Divergences of the basis functions (constant on the element).
  [[nodiscard]] const Eigen::VectorXd& divergences() const { return div_; }
  /// Row r = functional r applied to every basis function (identity up to rounding).
  [[nodiscard]] Eigen::MatrixXd dof_matrix() const;

  /// Applies the reference DOF functionals to an arbitrary field.
  [[nodiscard]] Eigen::VectorXd apply_dofs(const std::function<Vec2(const Vec2&)>& q) const;

 private:
  VectorSpaceKind kind_;
  int n_dofs_ = 0;
  int moments_ = 0;
  /// Basis expressed in the monomials (1,0), (0,1), (x,0), (y,0), (0,x), (0,y).
  Eigen::MatrixXd coefficients_;  // n_dofs x 6
  Eigen::VectorXd div_;
};

/// Scalar reference element.
class ScalarReferenceSpace {
 public:
  explicit ScalarReferenceSpace(ScalarSpaceKind kind);

  [[nodiscard]] ScalarSpaceKind kind() const { return kind_; }
  [[nodiscard]] int n_dofs() const { return kind_ == ScalarSpaceKind::P0 ? 1 : 3; }
  [[nodiscard]] Eigen::VectorXd values(const Vec2& xi) const;
  /// Reference gradients, 2 x n_dofs.
  [[nodiscard]] Eigen::Matrix2Xd gradients() const;

 private:
  ScalarSpaceKind kind_;
};

/// x = origin + A xi; A is the 3x2 derivative of the map.
struct AffineMap {
  Vec3 origin;
  Mat32 A;
  double jac = 0.0;  ///< sqrt(det(A^T A))
  Mat2 metric;       ///< A^T A
  Mat2 metric_inv;

  static AffineMap from_corners(const std::array<Vec3, 3>& corners);

  [[nodiscard]] Vec3 operator()(const Vec2& xi) const { return origin + A * xi; }
  /// Reference coordinates of a point in the plane of the triangle.
  [[nodiscard]] Vec2 inverse(const Vec3& x) const { return metric_inv * (A.transpose() * (x - origin)); }
  /// Surface gradients of scalar fields with the given reference gradients.
  [[nodiscard]] Eigen::Matrix3Xd surface_gradient(const Eigen::Matrix2Xd& ref_grads) const {
    return A * (metric_inv * ref_grads);
  }
};

/// Contravariant Piola transform: p = A p_hat / |A|.
Eigen::Matrix3Xd push_forward_vector(const AffineMap& map, const Eigen::Matrix2Xd& ref_values);

/// Outward unit conormal of local edge k for a counterclockwise triangle with
/// unit normal `normal`, multiplied by the edge length.
Vec3 scaled_conormal(const std::array<Vec3, 3>& corners, const Vec3& normal, int edge);

using TangentField = std::function<Vec3(const Vec3&)>;
/// Field defined per face: (triangle index, point) -> vector in the face plane.
using FaceVectorField = std::function<Vec3(Index, const Vec3&)>;
using ScalarField = std::function<double(const Vec3&)>;

/// Local edge moments of q on one triangle (outward conormal, local edge parameter).
Eigen::VectorXd interpolate_local(const std::array<Vec3, 3>& corners, const Vec3& normal,
                                  const TangentField& q, const VectorReferenceSpace& space);

/// Global interpolant I_h. One DOF block per edge, measured on the triangle
/// traversing the edge low -> high (edges[e].triangles[0]).
Eigen::VectorXd interpolate_Ih(const TraceMesh& mesh, const VectorReferenceSpace& space,
                               const FaceVectorField& q);

/// Number of global vector DOFs.
std::size_t n_global_vector_dofs(const TraceMesh& mesh, const VectorReferenceSpace& space);

/// Sign relating local DOF `dof` of triangle t to its global DOF:
/// local = sign * global.
int local_dof_sign(const TraceMesh& mesh, const VectorReferenceSpace& space, Index t, int dof);
Index global_dof_index(const TraceMesh& mesh, const VectorReferenceSpace& space, Index t, int dof);

/// Per-triangle local coefficients (n_triangles x n_dofs) of a global vector.
Eigen::MatrixXd localize(const TraceMesh& mesh, const VectorReferenceSpace& space,
                         const Eigen::VectorXd& global);

/// Value of the vector field with local coefficients `coeffs` at reference point xi.
Vec3 evaluate_vector(const AffineMap& map, const VectorReferenceSpace& space,
                     const Eigen::VectorXd& coeffs, const Vec2& xi);

/// Elementwise L2 projection pi_h onto P0/P1 (discontinuous);
/// returns n_triangles x n_dofs coefficients.
Eigen::MatrixXd project_pih(const TraceMesh& mesh, const ScalarReferenceSpace& space,
                            const ScalarField& u, int degree = kErrorDegree);

/// Same projection restricted to one triangle.
Eigen::VectorXd project_local(const std::array<Vec3, 3>& corners, const ScalarReferenceSpace& space,
                              const ScalarField& u, int degree = kErrorDegree);

/// Conforming P1 Lagrange interpolant: values at mesh vertices.
std::vector<double> interpolate_lagrange(const TraceMesh& mesh, const ScalarField& u);

}  // namespace mqt
