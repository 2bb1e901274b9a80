#pragma once

#include "mqt/elements.hpp"
#include "mqt/geometry.hpp"
#include "mqt/trace_mesh.hpp"

#include <Eigen/Sparse>

#include <optional>
#include <string>
#include <vector>

namespace mqt {

/// Discrete load f_h(x) = mu(x) f(P_d(x)) - c on the discrete surface, with the
/// constant c chosen so that int_Gamma f_h = 0 under assembly quadrature.
class RightHandSide {
 public:
  RightHandSide() = default;
  RightHandSide(const TraceMesh& mesh, const SurfaceField& surface, ScalarField f, double scale = 1.0);

  /// f_h at a point x of triangle t.
  [[nodiscard]] double operator()(Index t, const Vec3& x) const;
  /// mu f^l (no mean correction) at a point x of triangle t.
  [[nodiscard]] double lifted(Index t, const Vec3& x) const;

  [[nodiscard]] double mean_correction() const { return correction_; }
  [[nodiscard]] const Eigen::VectorXd& element_loads() const { return loads_; }
  /// ||mu f^l||_Gamma (assembly quadrature).
  [[nodiscard]] double lifted_norm() const { return lifted_norm_; }
  /// Set when |c| exceeds h^3 ||mu f^l||: the load is probably not compatible.
  [[nodiscard]] const std::optional<std::string>& warning() const { return warning_; }
  [[nodiscard]] bool is_zero() const { return !f_; }

 private:
  const TraceMesh* mesh_ = nullptr;
  const SurfaceField* surface_ = nullptr;
  ScalarField f_;
  double scale_ = 1.0;
  double correction_ = 0.0;
  double lifted_norm_ = 0.0;
  Eigen::VectorXd loads_;
  std::optional<std::string> warning_;
};

/// Builds f_h from the load on the smooth surface (which must have zero mean).
RightHandSide build_rhs(const ScalarField& f, const TraceMesh& mesh, const SurfaceField& surface);

/// Canonical-basis element matrices.
///   A(i, j) = int_T phi_i . phi_j
///   B(i, 0) = int_T div phi_i            (scalar space P0)
///   C(i, r) = int_dT phi_i . n_T lambda_r (lambda_r = psi_m in the global edge parameter)
///   F(0)    = int_T f_h
struct LocalBlocks {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd C;
  Eigen::VectorXd F;
};

/// `edge_signs` as stored in TraceMesh; `load` may be empty (F = 0).
LocalBlocks assemble_local(const std::array<Vec3, 3>& corners, const Vec3& normal,
                           const std::array<int, 3>& edge_signs, const VectorReferenceSpace& space,
                           const std::function<double(const Vec3&)>& load, int degree = kAssemblyDegree);
LocalBlocks assemble_local(const TraceMesh& mesh, Index t, const VectorReferenceSpace& space,
                           const RightHandSide& f_h, int degree = kAssemblyDegree);

/// Element data for condensation, expressed in an L2-orthonormal local basis
/// omega of the vector space: the canonical coefficients of a field with
/// omega-coefficients beta are D beta.
struct ElementCondensation {
  Eigen::MatrixXd D;       ///< DOF functionals applied to omega (n_q x n_q)
  Eigen::VectorXd div;     ///< int_T div omega_k
  Eigen::VectorXd sigma;   ///< global multiplier weight sign per local DOF
  double area = 0.0;
  double load = 0.0;       ///< int_T f_h
};

ElementCondensation condense_element(const std::array<Vec3, 3>& corners, const Vec3& normal,
                                     const std::array<int, 3>& edge_signs,
                                     const VectorReferenceSpace& space, double load);

/// Hybridized global system over edge multipliers, bordered by the mean-zero
/// constraint  sum_T |T| u_T = 0.
struct HybridSystem {
  VectorSpaceKind space = VectorSpaceKind::RT0;
  Eigen::SparseMatrix<double> matrix;  ///< unbordered, SPSD, kernel = constants
  Eigen::VectorXd rhs;
  Eigen::VectorXd border;
  double border_rhs = 0.0;
  std::vector<ElementCondensation> elements;

  [[nodiscard]] Eigen::SparseMatrix<double> bordered_matrix() const;
  [[nodiscard]] Eigen::VectorXd bordered_rhs() const;
};

HybridSystem condense_and_assemble(const TraceMesh& mesh, const VectorReferenceSpace& space,
                                   const RightHandSide& f_h);

struct SolutionFields {
  VectorSpaceKind space = VectorSpaceKind::RT0;
  Eigen::MatrixXd p;            ///< n_triangles x n_q local canonical coefficients
  Eigen::VectorXd u;            ///< P0 value per triangle
  Eigen::VectorXd multipliers;  ///< edge multipliers (empty for the oracle)
};

struct SolveOptions {
  bool check_residuals = true;
  double residual_tolerance = 1e-10;
  std::string context;  ///< prefix for diagnostics, e.g. "level 2"
};

SolutionFields solve_hybrid(const TraceMesh& mesh, const VectorReferenceSpace& space,
                            const HybridSystem& system, const RightHandSide& f_h,
                            const SolveOptions& options = {});

/// Convenience: build f_h-driven system and solve.
SolutionFields solve_hybrid(const TraceMesh& mesh, const VectorReferenceSpace& space,
                            const RightHandSide& f_h, const SolveOptions& options = {});

/// Test oracle: conforming global saddle-point system solved without condensation.
SolutionFields solve_saddle_point_oracle(const TraceMesh& mesh, const VectorReferenceSpace& space,
                                         const RightHandSide& f_h, const SolveOptions& options = {});

/// Relative residuals of the two equations of the discrete mixed problem.
struct MixedResiduals {
  double first = 0.0;   ///< a(p_h, q) - b(q, u_h), over global q
  double second = 0.0;  ///< b(p_h, v) - (f_h, v), over P0 v
  double mean = 0.0;    ///< |(u_h, 1)| / (|Gamma| max |u_h|)
};

MixedResiduals mixed_residuals(const TraceMesh& mesh, const VectorReferenceSpace& space,
                               const SolutionFields& fields, const RightHandSide& f_h);

/// lambda_max / lambda_2 of the unbordered multiplier matrix (dense eigensolve;
/// only for small systems). Returns nullopt above `max_size` unknowns.
std::optional<double> effective_condition_number(const HybridSystem& system, std::size_t max_size = 4000);

/// ||p_a - p_b||_Gamma and ||u_a - u_b||_Gamma.
std::pair<double, double> field_distance(const TraceMesh& mesh, const VectorReferenceSpace& space,
                                         const SolutionFields& a, const SolutionFields& b);

}  // namespace mqt
