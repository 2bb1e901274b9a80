#include "support.hpp"

#include "mqt/assembly.hpp"
#include "mqt/postprocess.hpp"

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include <cmath>

namespace {

using namespace mqt;
using namespace mqt::testing;

const std::array<VectorSpaceKind, 2> kSpaces{VectorSpaceKind::RT0, VectorSpaceKind::BDM1};

class SphereFixture : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    sphere_ = new Sphere(1.0);
    mesh_ = new TraceMesh(build_trace_mesh(*sphere_, Box{}, 8));
    problem_ = new ManufacturedProblem(manufactured_sphere());
    rhs_ = new RightHandSide(build_rhs(problem_->f, *mesh_, *sphere_));
  }
  static void TearDownTestSuite() {
    delete rhs_;
    delete problem_;
    delete mesh_;
    delete sphere_;
  }
  static inline Sphere* sphere_ = nullptr;
  static inline TraceMesh* mesh_ = nullptr;
  static inline ManufacturedProblem* problem_ = nullptr;
  static inline RightHandSide* rhs_ = nullptr;
};

/// Boundary of a tetrahedron around the origin: 4 faces, 6 edges.
TraceMesh tetrahedron_surface() {
  RawSurface raw;
  raw.vertices = {Vec3(1, 1, 1), Vec3(1, -1, -1), Vec3(-1, 1, -1), Vec3(-1, -1, 1)};
  raw.faces = {{{0, 1, 2}, 0}, {{0, 1, 3}, 0}, {{0, 2, 3}, 0}, {{1, 2, 3}, 0}};
  return bisect_quads(raw, Sphere(1.0));
}

TEST(LocalBlocks, MassMatrixPositiveDefinite) {
  Rng rng(20);
  for (VectorSpaceKind k : kSpaces) {
    const VectorReferenceSpace s(k);
    for (int i = 0; i < 100; ++i) {
      const auto c = random_anisotropic_triangle(rng, 1e3);
      const LocalBlocks b = assemble_local(c, unit_normal(c), {1, 1, 1}, s, {});
      EXPECT_LT((b.A - b.A.transpose()).cwiseAbs().maxCoeff(), 1e-12 * b.A.norm());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b.A);
      EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
      EXPECT_EQ(b.F.size(), 1);
      EXPECT_EQ(b.F[0], 0.0);
    }
  }
}

TEST(LocalBlocks, DivergenceMatchesBoundaryFlux) {
  // Total flux of a flux-dual basis function is one for the zeroth moments.
  Rng rng(21);
  for (VectorSpaceKind k : kSpaces) {
    const VectorReferenceSpace s(k);
    for (int i = 0; i < 100; ++i) {
      const auto c = random_anisotropic_triangle(rng, 1e3);
      const LocalBlocks b = assemble_local(c, unit_normal(c), {1, -1, 1}, s, {});
      for (int dof = 0; dof < s.n_dofs(); ++dof) {
        EXPECT_NEAR(b.B(dof, 0), dof % s.moments_per_edge() == 0 ? 1.0 : 0.0, 1e-12);
      }
      // lambda = 1 on every edge through the multiplier block.
      Eigen::VectorXd ones = Eigen::VectorXd::Zero(b.C.cols());
      for (int e = 0; e < 3; ++e) ones[e * s.moments_per_edge()] = 1.0;
      EXPECT_LT((b.C * ones - b.B.col(0)).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(LocalBlocks, ReferenceRt0MatchesOverIntegration) {
  const std::array<Vec3, 3> c{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  const VectorReferenceSpace s(VectorSpaceKind::RT0);
  const LocalBlocks b = assemble_local(c, Vec3(0, 0, 1), {1, 1, 1}, s, {});
  const LocalBlocks hi = assemble_local(c, Vec3(0, 0, 1), {1, 1, 1}, s, {}, 10);
  EXPECT_LT((b.A - hi.A).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((b.B - hi.B).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((b.C - hi.C).cwiseAbs().maxCoeff(), 1e-12);
  // Independent: phi_i = x - v_i, so A_ij = int (x - v_i).(x - v_j).
  const Quadrature q = triangle_rule(10);
  Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
  for (std::size_t k = 0; k < q.size(); ++k) {
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        a(i, j) += q.weights[k] * (q.points[k] - reference_vertex(i)).dot(q.points[k] - reference_vertex(j));
      }
    }
  }
  EXPECT_LT((b.A - a).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(LocalBlocks, LoadIntegral) {
  const std::array<Vec3, 3> c{Vec3(0, 0, 0), Vec3(2, 0, 0), Vec3(0, 1, 0)};
  const LocalBlocks b =
      assemble_local(c, Vec3(0, 0, 1), {1, 1, 1}, VectorReferenceSpace(VectorSpaceKind::RT0),
                     [](const Vec3& x) { return 1.0 + x[0]; });
  EXPECT_NEAR(b.F[0], 1.0 + 2.0 / 3.0, 1e-14);
}

TEST(HybridSystem, TetrahedronSurfaceIsSymmetricWithConstantKernel) {
  const TraceMesh m = tetrahedron_surface();
  ASSERT_EQ(m.n_triangles(), 4u);
  ASSERT_EQ(m.n_edges(), 6u);
  const VectorReferenceSpace s(VectorSpaceKind::RT0);
  const HybridSystem sys = condense_and_assemble(m, s, RightHandSide{});
  const Eigen::MatrixXd a(sys.matrix);
  ASSERT_EQ(a.rows(), 6);
  EXPECT_EQ(sys.bordered_matrix().rows(), 7);
  EXPECT_LT((a - a.transpose()).cwiseAbs().maxCoeff(), 1e-14 * a.cwiseAbs().maxCoeff());
  EXPECT_LT((a * Eigen::VectorXd::Ones(6)).norm(), 1e-12 * a.norm());
  EXPECT_EQ(sys.rhs.norm(), 0.0);
}

TEST_F(SphereFixture, RightHandSideHasZeroMean) {
  const Eigen::VectorXd& loads = rhs_->element_loads();
  EXPECT_LT(std::abs(loads.sum()), 1e-12 * loads.cwiseAbs().sum());
  EXPECT_LT(std::abs(rhs_->mean_correction()), 1e-2);
  EXPECT_FALSE(rhs_->warning().has_value());
  const RightHandSide zero = build_rhs([](const Vec3&) { return 0.0; }, *mesh_, *sphere_);
  EXPECT_EQ(zero.element_loads().norm(), 0.0);
  EXPECT_EQ(zero.mean_correction(), 0.0);
}

TEST(RightHandSide, MeanCorrectionDecaysFasterThanHSquared) {
  // The unshifted grid is point-symmetric and f is odd, so c vanishes to
  // rounding; the shifted grid exposes the quadrature error.
  const Sphere sphere(1.0);
  const ManufacturedProblem prob = manufactured_sphere();
  std::vector<double> errors, hs;
  for (int n : {8, 16, 32}) {
    const TraceMesh m = build_trace_mesh(sphere, Box{}, n, Vec3(0.013, 0.007, 0.021));
    const RightHandSide f = build_rhs(prob.f, m, sphere);
    double area = 0.0;
    for (Index t = 0; t < m.n_triangles(); ++t) area += m.area(t);
    errors.push_back(std::abs(f.mean_correction()) * std::sqrt(area));
    hs.push_back(m.h_bulk);
    EXPECT_LT(std::abs(f.mean_correction()), std::pow(m.h_bulk, 3) * f.lifted_norm());
    EXPECT_FALSE(f.warning().has_value());
  }
  const auto overall = eoc({errors.front(), errors.back()}, {hs.front(), hs.back()});
  ASSERT_TRUE(overall[0].has_value());
  EXPECT_GT(*overall[0], 2.0);
}

TEST_F(SphereFixture, GlobalMatrixSymmetricWithOneDimensionalKernel) {
  for (VectorSpaceKind k : kSpaces) {
    const VectorReferenceSpace s(k);
    const HybridSystem sys = condense_and_assemble(*mesh_, s, *rhs_);
    const Eigen::MatrixXd a(sys.matrix);
    const double amax = a.cwiseAbs().maxCoeff();
    EXPECT_LT((a - a.transpose()).cwiseAbs().maxCoeff(), 1e-13 * amax);
    Eigen::VectorXd constant = Eigen::VectorXd::Zero(a.rows());
    for (Eigen::Index i = 0; i < a.rows(); i += s.moments_per_edge()) constant[i] = 1.0;
    EXPECT_LT((a * constant).cwiseAbs().maxCoeff(), 1e-12 * amax);

    // Rank after Jacobi scaling, which removes the sliver-induced spread of
    // the diagonal without changing the kernel dimension.
    const Eigen::VectorXd d = a.diagonal().cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd scaled = d.asDiagonal() * a * d.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scaled, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd ev = eig.eigenvalues();
    const double top = ev.cwiseAbs().maxCoeff();
    EXPECT_LT(std::abs(ev[0]), 1e-12 * top) << to_string(k);
    EXPECT_GT(ev[1], 1e-8 * top) << to_string(k);

    const auto cond = effective_condition_number(sys);
    ASSERT_TRUE(cond.has_value());
    EXPECT_GT(*cond, 1.0);
    EXPECT_FALSE(effective_condition_number(sys, 10).has_value());
  }
}

TEST_F(SphereFixture, HybridMatchesSaddlePointOracle) {
  for (VectorSpaceKind k : kSpaces) {
    const VectorReferenceSpace s(k);
    const SolutionFields hybrid = solve_hybrid(*mesh_, s, *rhs_);
    const SolutionFields oracle = solve_saddle_point_oracle(*mesh_, s, *rhs_);
    const auto [dp, du] = field_distance(*mesh_, s, hybrid, oracle);
    EXPECT_LE(dp, 1e-8) << to_string(k);
    EXPECT_LE(du, 1e-8) << to_string(k);
    EXPECT_GT(hybrid.u.norm(), 0.1);
  }
}

TEST_F(SphereFixture, DiscreteEquationsHold) {
  for (VectorSpaceKind k : kSpaces) {
    const VectorReferenceSpace s(k);
    for (const SolutionFields& f : {solve_hybrid(*mesh_, s, *rhs_), solve_saddle_point_oracle(*mesh_, s, *rhs_)}) {
      const MixedResiduals r = mixed_residuals(*mesh_, s, f, *rhs_);
      EXPECT_LE(r.first, 1e-10) << to_string(k);
      EXPECT_LE(r.second, 1e-10) << to_string(k);
      EXPECT_LE(r.mean, 1e-12) << to_string(k);
    }
  }
}

TEST_F(SphereFixture, ZeroLoadGivesZeroFields) {
  const RightHandSide zero = build_rhs([](const Vec3&) { return 0.0; }, *mesh_, *sphere_);
  for (VectorSpaceKind k : kSpaces) {
    const VectorReferenceSpace s(k);
    const SolutionFields f = solve_hybrid(*mesh_, s, zero);
    EXPECT_EQ(f.u.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(f.p.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(f.multipliers.cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST_F(SphereFixture, SolutionIsLinearInTheLoad) {
  const RightHandSide doubled(*mesh_, *sphere_, problem_->f, 2.0);
  for (VectorSpaceKind k : kSpaces) {
    const VectorReferenceSpace s(k);
    const SolutionFields a = solve_hybrid(*mesh_, s, *rhs_);
    const SolutionFields b = solve_hybrid(*mesh_, s, doubled);
    EXPECT_LT((b.u - 2 * a.u).cwiseAbs().maxCoeff(), 1e-12 * a.u.cwiseAbs().maxCoeff());
    EXPECT_LT((b.p - 2 * a.p).cwiseAbs().maxCoeff(), 1e-12 * a.p.cwiseAbs().maxCoeff());
  }
}

TEST_F(SphereFixture, CondensationRecoversCanonicalCoefficients) {
  const VectorReferenceSpace s(VectorSpaceKind::BDM1);
  const HybridSystem sys = condense_and_assemble(*mesh_, s, *rhs_);
  ASSERT_EQ(sys.elements.size(), mesh_->n_triangles());
  for (Index t = 0; t < mesh_->n_triangles(); t += 11) {
    const ElementCondensation& el = sys.elements[t];
    const LocalBlocks b = assemble_local(*mesh_, t, s, *rhs_);
    // omega is L2-orthonormal: D^T A D = I, up to the conditioning of A.
    const Eigen::MatrixXd g = el.D.transpose() * b.A * el.D;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b.A, Eigen::EigenvaluesOnly);
    const double cond = eig.eigenvalues().maxCoeff() / eig.eigenvalues().minCoeff();
    EXPECT_LT((g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff(), 1e-12 * cond);
    EXPECT_NEAR(el.area, mesh_->area(t), 1e-15);
    EXPECT_NEAR(el.load, b.F[0], 1e-14);
  }
}

}  // namespace
