#pragma once

#include "mqt/assembly.hpp"
#include "mqt/elements.hpp"
#include "mqt/geometry.hpp"
#include "mqt/trace_mesh.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace mqt {

/// Exact data on the smooth surface: u, its tangential gradient, p = -grad u
/// and the load f = -Laplace-Beltrami(u). All functions take points on gamma.
struct ManufacturedProblem {
  ScalarField u;
  TangentField grad_u;
  ScalarField f;

  [[nodiscard]] Vec3 p(const Vec3& x) const { return -grad_u(x); }
};

/// u = sin(x) + y + z^3 on the unit sphere.
ManufacturedProblem manufactured_sphere();

enum class PostprocessVariant { Neumann, Gradient };

std::string_view to_string(PostprocessVariant v);

/// Local P1 reconstruction u* = mean + gradient . (x - centroid) on one triangle.
struct LocalP1 {
  Vec3 centroid;
  double mean = 0.0;
  Vec3 gradient = Vec3::Zero();
  std::array<double, 3> vertex_values{};

  [[nodiscard]] double operator()(const Vec3& x) const { return mean + gradient.dot(x - centroid); }
};

/// Uses f* = `load` and the boundary fluxes of p_h.
LocalP1 postprocess_neumann(const std::array<Vec3, 3>& corners, const Vec3& normal,
                            const VectorReferenceSpace& space, const Eigen::VectorXd& p_coeffs,
                            double u_value, const std::function<double(const Vec3&)>& load);

/// Uses only p_h: int grad u* . grad v = -int p_h . grad v.
LocalP1 postprocess_gradient(const std::array<Vec3, 3>& corners, const Vec3& normal,
                             const VectorReferenceSpace& space, const Eigen::VectorXd& p_coeffs,
                             double u_value);

/// Elementwise postprocessing over a whole mesh. The Neumann variant takes
/// f* = mu f^l from `f_h`.
std::vector<LocalP1> postprocess(const TraceMesh& mesh, const VectorReferenceSpace& space,
                                 const SolutionFields& fields, const RightHandSide& f_h,
                                 PostprocessVariant variant);

struct ErrorOptions {
  int degree = kErrorDegree;
  PostprocessVariant variant = PostprocessVariant::Neumann;
  /// Compare p_h against Pi_h (p o P_d) instead of the Piola transform.
  bool naive_vector_lift = false;
};

struct ErrorRow {
  double h = 0.0;  ///< bulk mesh size when known, else max triangle diameter
  std::size_t n_triangles = 0;
  double err_p = 0.0;     ///< ||p~ - p_h||_Gamma
  double err_u = 0.0;     ///< ||u^l - u_h||_Gamma
  double err_eu = 0.0;    ///< ||pi_h u^l - u_h||_Gamma
  double err_post = 0.0;  ///< ||u^l - u_h*||_Gamma
};

ErrorRow compute_errors(const TraceMesh& mesh, const SurfaceField& surface, const VectorReferenceSpace& space,
                        const ManufacturedProblem& problem, const SolutionFields& fields,
                        const RightHandSide& f_h, const ErrorOptions& options = {});

/// ||u^l - u*||_Gamma for a stitched elementwise reconstruction.
double postprocessed_error(const TraceMesh& mesh, const SurfaceField& surface, const ScalarField& u,
                           const std::vector<LocalP1>& post, int degree = kErrorDegree);

/// Exact data injected into the discrete spaces: u_h = pi_h u^l (P0), p_h = I_h p~.
SolutionFields interpolated_exact_fields(const TraceMesh& mesh, const SurfaceField& surface,
                                         const VectorReferenceSpace& space, const ManufacturedProblem& problem);

/// ||u^l - I_L u^l||_Gamma.
double lagrange_interpolation_error(const TraceMesh& mesh, const SurfaceField& surface, const ScalarField& u,
                                    int degree = kErrorDegree);

/// Sup over quadrature points of |Pi - B_h| and |1 - mu|, and min mu.
struct GeometricDiagnostics {
  double max_bh_deviation = 0.0;
  double max_mu_deviation = 0.0;
  double min_mu = 0.0;
};

GeometricDiagnostics geometric_diagnostics(const TraceMesh& mesh, const SurfaceField& surface,
                                           int degree = kErrorDegree);

/// rate_i = log(e_i / e_{i+1}) / log(h_i / h_{i+1}); nullopt when undefined.
std::vector<std::optional<double>> eoc(const std::vector<double>& errors, const std::vector<double>& hs);

}  // namespace mqt
