#include "mqt/assembly.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mqt {

namespace {

constexpr int kEdgePoints = 6;

Eigen::Index as_index(std::size_t i) { return static_cast<Eigen::Index>(i); }

}  // namespace

// ---------------------------------------------------------------------------
// Right-hand side

RightHandSide::RightHandSide(const TraceMesh& mesh, const SurfaceField& surface, ScalarField f, double scale)
    : mesh_(&mesh), surface_(&surface), f_(std::move(f)), scale_(scale) {
  const Quadrature q = triangle_rule(kAssemblyDegree);
  const std::size_t nt = mesh.n_triangles();
  Eigen::VectorXd raw(as_index(nt));
  Eigen::VectorXd areas(as_index(nt));
  double norm2 = 0.0;
  for (Index t = 0; t < nt; ++t) {
    const AffineMap map = AffineMap::from_corners(mesh.corners(t));
    double integral = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
      const double v = lifted(t, map(q.points[i]));
      integral += q.weights[i] * map.jac * v;
      norm2 += q.weights[i] * map.jac * v * v;
    }
    raw[as_index(t)] = integral;
    areas[as_index(t)] = 0.5 * map.jac;
  }
  correction_ = raw.sum() / areas.sum();
  loads_ = raw - correction_ * areas;
  lifted_norm_ = std::sqrt(norm2);
  const double h3 = mesh.h * mesh.h * mesh.h;
  if (std::abs(correction_) > h3 * lifted_norm_) {
    std::ostringstream os;
    os << "mean correction |c| = " << std::abs(correction_) << " exceeds h^3 ||mu f^l|| = " << h3 * lifted_norm_
       << "; the load may not be compatible or quadrature is too coarse";
    warning_ = os.str();
  }
}

double RightHandSide::lifted(Index t, const Vec3& x) const {
  if (!f_) return 0.0;
  const TangentFrame frame = make_frame(*surface_, x, mesh_->face_normals[t]);
  return scale_ * area_ratio_mu(frame) * f_(frame.point_on_surface);
}

double RightHandSide::operator()(Index t, const Vec3& x) const {
  if (!f_) return 0.0;
  return lifted(t, x) - correction_;
}

RightHandSide build_rhs(const ScalarField& f, const TraceMesh& mesh, const SurfaceField& surface) {
  return RightHandSide(mesh, surface, f);
}

// ---------------------------------------------------------------------------
// Local blocks

LocalBlocks assemble_local(const std::array<Vec3, 3>& corners, const Vec3& normal,
                           const std::array<int, 3>& edge_signs, const VectorReferenceSpace& space,
                           const std::function<double(const Vec3&)>& load, int degree) {
  const AffineMap map = AffineMap::from_corners(corners);
  const int nq = space.n_dofs();
  const int k = space.moments_per_edge();
  const Quadrature q = triangle_rule(degree);

  LocalBlocks blocks;
  blocks.A = Eigen::MatrixXd::Zero(nq, nq);
  blocks.B = Eigen::MatrixXd::Zero(nq, 1);
  blocks.C = Eigen::MatrixXd::Zero(nq, 3 * k);
  blocks.F = Eigen::VectorXd::Zero(1);
  const Eigen::VectorXd& div = space.divergences();
  for (std::size_t i = 0; i < q.size(); ++i) {
    const Eigen::Matrix2Xd phi = space.values(q.points[i]);
    blocks.A += q.weights[i] / map.jac * (phi.transpose() * map.metric * phi);
    blocks.B.col(0) += q.weights[i] * div;
    if (load) blocks.F[0] += q.weights[i] * map.jac * load(map(q.points[i]));
  }

  const LineQuadrature g = gauss_legendre(kEdgePoints);
  for (int e = 0; e < 3; ++e) {
    const Vec3 n = scaled_conormal(corners, normal, e);
    const Vec2 a = reference_vertex((e + 1) % 3);
    const Vec2 b = reference_vertex((e + 2) % 3);
    const int s = edge_signs[static_cast<std::size_t>(e)];
    for (std::size_t i = 0; i < g.points.size(); ++i) {
      const double t = g.points[i];
      const double t_global = s > 0 ? t : 1.0 - t;
      const Eigen::Matrix3Xd phi = push_forward_vector(map, space.values(a + t * (b - a)));
      const Eigen::RowVectorXd flux = n.transpose() * phi;
      for (int m = 0; m < k; ++m) {
        blocks.C.col(e * k + m) += g.weights[i] * edge_moment_weight(m, t_global) * flux.transpose();
      }
    }
  }
  return blocks;
}

LocalBlocks assemble_local(const TraceMesh& mesh, Index t, const VectorReferenceSpace& space,
                           const RightHandSide& f_h, int degree) {
  return assemble_local(mesh.corners(t), mesh.face_normals[t], mesh.edge_signs[t], space,
                        [&](const Vec3& x) { return f_h(t, x); }, degree);
}

// ---------------------------------------------------------------------------
// Condensation

namespace {

// Physical prebasis of the local vector space in a frame adapted to the
// triangle: e1 along the longest edge, e2 = normal x e1, coordinates scaled by
// the longest edge length and by the height over it.
struct AdaptedFrame {
  Vec3 centroid;
  Vec3 e1;
  Vec3 e2;
  double length = 0.0;
  double height = 0.0;
};

AdaptedFrame adapted_frame(const std::array<Vec3, 3>& c, const Vec3& normal) {
  AdaptedFrame f;
  f.centroid = (c[0] + c[1] + c[2]) / 3.0;
  std::size_t longest = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double l = (c[(i + 2) % 3] - c[(i + 1) % 3]).norm();
    if (l > best) best = l, longest = i;
  }
  f.e1 = (c[(longest + 2) % 3] - c[(longest + 1) % 3]).normalized();
  f.e2 = normal.cross(f.e1).normalized();
  f.length = best;
  const double area = 0.5 * (c[1] - c[0]).cross(c[2] - c[0]).norm();
  f.height = 2.0 * area / best;
  return f;
}

Eigen::Matrix3Xd prebasis_values(const AdaptedFrame& f, VectorSpaceKind kind, const Vec3& x) {
  const Vec3 r = x - f.centroid;
  if (kind == VectorSpaceKind::RT0) {
    Eigen::Matrix3Xd m(3, 3);
    m.col(0) = f.e1;
    m.col(1) = f.e2;
    m.col(2) = r / f.length;
    return m;
  }
  const double s = r.dot(f.e1) / f.length;
  const double t = r.dot(f.e2) / f.height;
  Eigen::Matrix3Xd m(3, 6);
  m.col(0) = f.e1;
  m.col(1) = f.e2;
  m.col(2) = s * f.e1;
  m.col(3) = t * f.e1;
  m.col(4) = s * f.e2;
  m.col(5) = t * f.e2;
  return m;
}

}  // namespace

ElementCondensation condense_element(const std::array<Vec3, 3>& corners, const Vec3& normal,
                                     const std::array<int, 3>& edge_signs,
                                     const VectorReferenceSpace& space, double load) {
  const AffineMap map = AffineMap::from_corners(corners);
  const AdaptedFrame frame = adapted_frame(corners, normal);
  const VectorSpaceKind kind = space.kind();
  const int nq = space.n_dofs();
  const int k = space.moments_per_edge();

  const Quadrature q = triangle_rule(2);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(nq, nq);
  for (std::size_t i = 0; i < q.size(); ++i) {
    const Eigen::Matrix3Xd m = prebasis_values(frame, kind, map(q.points[i]));
    gram += q.weights[i] * map.jac * (m.transpose() * m);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) throw Error("condense_element: singular local mass matrix");
  // omega = m * T with T = L^{-T}.
  const Eigen::MatrixXd T =
      llt.matrixU().solve(Eigen::MatrixXd::Identity(nq, nq));

  Eigen::MatrixXd dm = Eigen::MatrixXd::Zero(nq, nq);
  const LineQuadrature g = gauss_legendre(3);
  for (int e = 0; e < 3; ++e) {
    const Vec3& a = corners[static_cast<std::size_t>((e + 1) % 3)];
    const Vec3& b = corners[static_cast<std::size_t>((e + 2) % 3)];
    const Vec3 n = scaled_conormal(corners, normal, e);
    for (std::size_t i = 0; i < g.points.size(); ++i) {
      const double t = g.points[i];
      const Eigen::RowVectorXd flux = n.transpose() * prebasis_values(frame, kind, a + t * (b - a));
      for (int m = 0; m < k; ++m) dm.row(e * k + m) += g.weights[i] * edge_moment_weight(m, t) * flux;
    }
  }

  ElementCondensation out;
  out.D = dm * T;
  // int_T div omega_k as the net boundary flux, so that the local balance
  // div_T . beta = F holds in the canonical moments exactly.
  Eigen::VectorXd flux = Eigen::VectorXd::Zero(nq);
  for (int e = 0; e < 3; ++e) flux += out.D.row(e * k).transpose();
  out.div = flux;
  out.sigma.resize(nq);
  for (int r = 0; r < nq; ++r) {
    const int s = edge_signs[static_cast<std::size_t>(r / k)];
    out.sigma[r] = (r % k) == 0 ? 1.0 : static_cast<double>(s);
  }
  out.area = 0.5 * map.jac;
  out.load = load;
  return out;
}

Eigen::SparseMatrix<double> HybridSystem::bordered_matrix() const {
  const Eigen::Index n = matrix.rows();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(matrix.nonZeros() + 2 * n));
  for (Eigen::Index c = 0; c < matrix.outerSize(); ++c) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(matrix, c); it; ++it) {
      trip.emplace_back(it.row(), it.col(), it.value());
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (border[i] != 0.0) {
      trip.emplace_back(i, n, border[i]);
      trip.emplace_back(n, i, border[i]);
    }
  }
  Eigen::SparseMatrix<double> k(n + 1, n + 1);
  k.setFromTriplets(trip.begin(), trip.end());
  return k;
}

Eigen::VectorXd HybridSystem::bordered_rhs() const {
  Eigen::VectorXd r(rhs.size() + 1);
  r.head(rhs.size()) = rhs;
  r[rhs.size()] = border_rhs;
  return r;
}

HybridSystem condense_and_assemble(const TraceMesh& mesh, const VectorReferenceSpace& space,
                                   const RightHandSide& f_h) {
  const auto k = static_cast<Index>(space.moments_per_edge());
  const int nq = space.n_dofs();
  const auto n = as_index(mesh.n_edges() * k);
  const Eigen::VectorXd& loads = f_h.element_loads();

  HybridSystem sys;
  sys.space = space.kind();
  sys.rhs = Eigen::VectorXd::Zero(n);
  sys.border = Eigen::VectorXd::Zero(n);
  sys.elements.reserve(mesh.n_triangles());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(mesh.n_triangles() * static_cast<std::size_t>(nq * nq));

  for (Index t = 0; t < mesh.n_triangles(); ++t) {
    const double load = loads.size() > 0 ? loads[as_index(t)] : 0.0;
    ElementCondensation el =
        condense_element(mesh.corners(t), mesh.face_normals[t], mesh.edge_signs[t], space, load);
    const double bb = el.div.squaredNorm();
    const Eigen::MatrixXd proj =
        Eigen::MatrixXd::Identity(nq, nq) - el.div * el.div.transpose() / bb;
    const Eigen::MatrixXd sd = el.sigma.asDiagonal() * el.D;
    const Eigen::MatrixXd local = sd * proj * sd.transpose();
    const Eigen::VectorXd sdb = sd * el.div / bb;

    std::array<Eigen::Index, 6> rows{};
    for (int r = 0; r < nq; ++r) {
      rows[static_cast<std::size_t>(r)] = as_index(global_dof_index(mesh, space, t, r));
    }
    for (int r = 0; r < nq; ++r) {
      const Eigen::Index gr = rows[static_cast<std::size_t>(r)];
      for (int c = 0; c < nq; ++c) trip.emplace_back(gr, rows[static_cast<std::size_t>(c)], local(r, c));
      sys.rhs[gr] += sdb[r] * el.load;
      sys.border[gr] += el.area * sdb[r];
    }
    sys.border_rhs -= el.area * el.load / bb;
    sys.elements.push_back(std::move(el));
  }
  sys.matrix.resize(n, n);
  sys.matrix.setFromTriplets(trip.begin(), trip.end());
  // Exact symmetry: average with the transpose.
  Eigen::SparseMatrix<double> st = sys.matrix.transpose();
  sys.matrix = 0.5 * (sys.matrix + st);
  return sys;
}

// ---------------------------------------------------------------------------
// Solvers

namespace {

Eigen::VectorXd sparse_direct_solve(const Eigen::SparseMatrix<double>& k, const Eigen::VectorXd& rhs,
                                    const std::string& context,
                                    const std::function<std::optional<double>()>& condition_estimate) {
  Eigen::SparseMatrix<double> kc = k;
  kc.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(kc);
  lu.factorize(kc);
  if (lu.info() != Eigen::Success) {
    std::ostringstream os;
    os << (context.empty() ? "" : context + ": ") << "sparse factorization failed (" << lu.lastErrorMessage()
       << ")";
    const auto cond = condition_estimate ? condition_estimate() : std::nullopt;
    if (cond) {
      os << "; effective condition number " << *cond;
    } else {
      os << "; effective condition number not computed (system too large)";
    }
    throw Error(os.str());
  }
  Eigen::VectorXd x = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !x.allFinite()) {
    throw Error((context.empty() ? "" : context + ": ") + std::string("sparse solve failed"));
  }
  return x;
}

void check_residuals(const TraceMesh& mesh, const VectorReferenceSpace& space, const SolutionFields& fields,
                     const RightHandSide& f_h, const SolveOptions& options) {
  if (!options.check_residuals) return;
  const MixedResiduals r = mixed_residuals(mesh, space, fields, f_h);
  if (r.first > options.residual_tolerance || r.second > options.residual_tolerance ||
      r.mean > options.residual_tolerance) {
    std::ostringstream os;
    os << (options.context.empty() ? "" : options.context + ": ")
       << "discrete mixed equations not satisfied (relative residuals: first " << r.first << ", second "
       << r.second << ", mean " << r.mean << ")";
    throw Error(os.str());
  }
}

}  // namespace

SolutionFields solve_hybrid(const TraceMesh& mesh, const VectorReferenceSpace& space,
                            const HybridSystem& system, const RightHandSide& f_h,
                            const SolveOptions& options) {
  const Eigen::Index n = system.matrix.rows();
  const Eigen::VectorXd x = sparse_direct_solve(system.bordered_matrix(), system.bordered_rhs(), options.context,
                                                [&] { return effective_condition_number(system); });

  SolutionFields out;
  out.space = space.kind();
  out.multipliers = x.head(n);
  const int nq = space.n_dofs();
  out.p.resize(as_index(mesh.n_triangles()), nq);
  out.u.resize(as_index(mesh.n_triangles()));
  Eigen::VectorXd lambda(nq);
  for (Index t = 0; t < mesh.n_triangles(); ++t) {
    const ElementCondensation& el = system.elements[t];
    for (int r = 0; r < nq; ++r) lambda[r] = out.multipliers[as_index(global_dof_index(mesh, space, t, r))];
    const Eigen::VectorXd c = el.D.transpose() * el.sigma.cwiseProduct(lambda);
    const double bb = el.div.squaredNorm();
    const double u = (el.load + el.div.dot(c)) / bb;
    // beta = b u - c, split along b and b-orthogonal; the orthogonal part is
    // projected twice since c can be nearly parallel to b on slivers.
    Eigen::VectorXd perp = c - el.div * (el.div.dot(c) / bb);
    perp -= el.div * (el.div.dot(perp) / bb);
    const Eigen::VectorXd beta = el.div * (el.load / bb) - perp;
    out.p.row(as_index(t)) = (el.D * beta).transpose();
    out.u[as_index(t)] = u;
  }
  check_residuals(mesh, space, out, f_h, options);
  return out;
}

SolutionFields solve_hybrid(const TraceMesh& mesh, const VectorReferenceSpace& space, const RightHandSide& f_h,
                            const SolveOptions& options) {
  return solve_hybrid(mesh, space, condense_and_assemble(mesh, space, f_h), f_h, options);
}

SolutionFields solve_saddle_point_oracle(const TraceMesh& mesh, const VectorReferenceSpace& space,
                                         const RightHandSide& f_h, const SolveOptions& options) {
  const int nq = space.n_dofs();
  const auto np = as_index(n_global_vector_dofs(mesh, space));
  const auto nt = as_index(mesh.n_triangles());
  const Eigen::Index n = np + nt + 1;
  const Eigen::VectorXd& loads = f_h.element_loads();

  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (Index t = 0; t < mesh.n_triangles(); ++t) {
    const LocalBlocks blk = assemble_local(mesh.corners(t), mesh.face_normals[t], mesh.edge_signs[t], space, {});
    const Eigen::Index ut = np + as_index(t);
    for (int i = 0; i < nq; ++i) {
      const auto gi = as_index(global_dof_index(mesh, space, t, i));
      const double si = local_dof_sign(mesh, space, t, i);
      for (int j = 0; j < nq; ++j) {
        const auto gj = as_index(global_dof_index(mesh, space, t, j));
        const double sj = local_dof_sign(mesh, space, t, j);
        trip.emplace_back(gi, gj, si * sj * blk.A(i, j));
      }
      trip.emplace_back(gi, ut, -si * blk.B(i, 0));
      trip.emplace_back(ut, gi, -si * blk.B(i, 0));
    }
    const double area = mesh.area(t);
    trip.emplace_back(ut, n - 1, -area);
    trip.emplace_back(n - 1, ut, -area);
    rhs[ut] = loads.size() > 0 ? -loads[as_index(t)] : 0.0;
  }
  Eigen::SparseMatrix<double> k(n, n);
  k.setFromTriplets(trip.begin(), trip.end());
  const Eigen::VectorXd x = sparse_direct_solve(k, rhs, options.context, {});

  SolutionFields out;
  out.space = space.kind();
  out.p = localize(mesh, space, x.head(np));
  out.u = x.segment(np, nt);
  check_residuals(mesh, space, out, f_h, options);
  return out;
}

MixedResiduals mixed_residuals(const TraceMesh& mesh, const VectorReferenceSpace& space,
                               const SolutionFields& fields, const RightHandSide& f_h) {
  const int nq = space.n_dofs();
  const auto np = as_index(n_global_vector_dofs(mesh, space));
  const Eigen::VectorXd& loads = f_h.element_loads();
  Eigen::VectorXd first = Eigen::VectorXd::Zero(np);
  Eigen::VectorXd first_scale = Eigen::VectorXd::Zero(np);
  double second = 0.0;
  double second_scale = 0.0;
  double mean = 0.0;
  double area_total = 0.0;
  for (Index t = 0; t < mesh.n_triangles(); ++t) {
    const LocalBlocks blk = assemble_local(mesh.corners(t), mesh.face_normals[t], mesh.edge_signs[t], space, {});
    const Eigen::VectorXd alpha = fields.p.row(as_index(t)).transpose();
    const double u = fields.u[as_index(t)];
    const Eigen::VectorXd r = blk.A * alpha - blk.B.col(0) * u;
    const Eigen::VectorXd scale = blk.A.cwiseAbs() * alpha.cwiseAbs() + blk.B.col(0).cwiseAbs() * std::abs(u);
    for (int i = 0; i < nq; ++i) {
      const auto gi = as_index(global_dof_index(mesh, space, t, i));
      first[gi] += local_dof_sign(mesh, space, t, i) * r[i];
      first_scale[gi] += scale[i];
    }
    const double load = loads.size() > 0 ? loads[as_index(t)] : 0.0;
    second = std::max(second, std::abs(blk.B.col(0).dot(alpha) - load));
    second_scale = std::max({second_scale, blk.B.col(0).cwiseAbs().dot(alpha.cwiseAbs()), std::abs(load)});
    const double area = mesh.area(t);
    mean += area * u;
    area_total += area;
  }
  MixedResiduals out;
  const double fs = first_scale.cwiseAbs().maxCoeff();
  out.first = fs > 0.0 ? first.cwiseAbs().maxCoeff() / fs : 0.0;
  out.second = second_scale > 0.0 ? second / second_scale : 0.0;
  const double umax = fields.u.size() > 0 ? fields.u.cwiseAbs().maxCoeff() : 0.0;
  out.mean = umax > 0.0 ? std::abs(mean) / (area_total * umax) : 0.0;
  return out;
}

std::optional<double> effective_condition_number(const HybridSystem& system, std::size_t max_size) {
  if (static_cast<std::size_t>(system.matrix.rows()) > max_size) return std::nullopt;
  const Eigen::MatrixXd dense(system.matrix);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev = es.eigenvalues();
  if (ev.size() < 2 || !(ev[1] > 0.0)) return std::nullopt;
  return ev[ev.size() - 1] / ev[1];
}

std::pair<double, double> field_distance(const TraceMesh& mesh, const VectorReferenceSpace& space,
                                         const SolutionFields& a, const SolutionFields& b) {
  const Quadrature q = triangle_rule(kErrorDegree);
  double ep = 0.0;
  double eu = 0.0;
  for (Index t = 0; t < mesh.n_triangles(); ++t) {
    const AffineMap map = AffineMap::from_corners(mesh.corners(t));
    const Eigen::VectorXd diff = (a.p.row(as_index(t)) - b.p.row(as_index(t))).transpose();
    for (std::size_t i = 0; i < q.size(); ++i) {
      ep += q.weights[i] * map.jac * evaluate_vector(map, space, diff, q.points[i]).squaredNorm();
    }
    const double du = a.u[as_index(t)] - b.u[as_index(t)];
    eu += 0.5 * map.jac * du * du;
  }
  return {std::sqrt(ep), std::sqrt(eu)};
}

}  // namespace mqt
