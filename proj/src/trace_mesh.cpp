#include "mqt/trace_mesh.hpp"

#include "mqt/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <queue>
#include <unordered_map>
#include <utility>

namespace mqt {

namespace {

double tet_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return (b - a).dot((c - a).cross(d - a)) / 6.0;
}

std::uint64_t edge_key(Index a, Index b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

}  // namespace

double BulkMesh::signed_volume(Index tet) const {
  const auto& t = tets[tet];
  return tet_volume(vertices[t[0]], vertices[t[1]], vertices[t[2]], vertices[t[3]]);
}

BulkMesh build_bulk_mesh(const Box& box, int n) {
  if (n < 1) throw Error("build_bulk_mesh: n must be >= 1");
  const Vec3 extent = box.hi - box.lo;
  if (!(extent.minCoeff() > 0.0)) throw Error("build_bulk_mesh: degenerate box");

  const auto m = static_cast<Index>(n) + 1;
  BulkMesh mesh;
  mesh.vertices.reserve(m * m * m);
  for (Index k = 0; k < m; ++k) {
    for (Index j = 0; j < m; ++j) {
      for (Index i = 0; i < m; ++i) {
        const Vec3 s(static_cast<double>(i), static_cast<double>(j), static_cast<double>(k));
        mesh.vertices.push_back(box.lo + extent.cwiseProduct(s) / static_cast<double>(n));
      }
    }
  }
  const auto id = [m](Index i, Index j, Index k) { return i + m * (j + m * k); };

  static constexpr std::array<std::array<int, 3>, 6> kPermutations{{
      {0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};

  const auto nn = static_cast<Index>(n);
  mesh.tets.reserve(6 * nn * nn * nn);
  for (Index k = 0; k < nn; ++k) {
    for (Index j = 0; j < nn; ++j) {
      for (Index i = 0; i < nn; ++i) {
        for (const auto& perm : kPermutations) {
          std::array<Index, 3> c{i, j, k};
          std::array<Index, 4> tet{};
          tet[0] = id(c[0], c[1], c[2]);
          for (int s = 0; s < 3; ++s) {
            ++c[static_cast<std::size_t>(perm[static_cast<std::size_t>(s)])];
            tet[static_cast<std::size_t>(s) + 1] = id(c[0], c[1], c[2]);
          }
          const double vol = tet_volume(mesh.vertices[tet[0]], mesh.vertices[tet[1]],
                                        mesh.vertices[tet[2]], mesh.vertices[tet[3]]);
          if (vol < 0.0) std::swap(tet[2], tet[3]);
          mesh.tets.push_back(tet);
        }
      }
    }
  }
  mesh.h_bulk = (extent / static_cast<double>(n)).norm();
  return mesh;
}

std::vector<double> perturbed_vertex_values(const BulkMesh& bulk, std::vector<double> values, double shift) {
  if (values.size() != bulk.vertices.size()) {
    throw Error("perturbed_vertex_values: expected one value per bulk vertex");
  }
  const double eps = shift * bulk.h_bulk;
  for (double& v : values) {
    if (!std::isfinite(v)) throw Error("extract_trace_surface: non-finite level-set value");
    if (std::abs(v) < eps) v = eps;
  }
  return values;
}

RawSurface extract_trace_surface(const BulkMesh& bulk, const LevelSet& psi, double shift) {
  std::vector<double> values;
  values.reserve(bulk.vertices.size());
  for (const Vec3& v : bulk.vertices) values.push_back(psi(v));
  return extract_trace_surface(bulk, values, shift);
}

RawSurface extract_trace_surface(const BulkMesh& bulk, const std::vector<double>& vertex_values, double shift) {
  const std::vector<double> psi = perturbed_vertex_values(bulk, vertex_values, shift);

  RawSurface raw;
  std::unordered_map<std::uint64_t, Index> cut_ids;
  const auto cut = [&](Index a, Index b) -> Index {
    if (a > b) std::swap(a, b);
    const auto [it, inserted] = cut_ids.try_emplace(edge_key(a, b), raw.vertices.size());
    if (inserted) {
      const double t = psi[a] / (psi[a] - psi[b]);
      raw.vertices.push_back(bulk.vertices[a] + t * (bulk.vertices[b] - bulk.vertices[a]));
      raw.cut_edges.push_back({a, b});
    }
    return it->second;
  };

  for (Index t = 0; t < bulk.tets.size(); ++t) {
    const auto& tet = bulk.tets[t];
    std::array<Index, 4> neg{};
    std::array<Index, 4> pos{};
    std::size_t n_neg = 0;
    std::size_t n_pos = 0;
    for (Index v : tet) {
      if (psi[v] < 0.0) {
        neg[n_neg++] = v;
      } else {
        pos[n_pos++] = v;
      }
    }
    RawFace face;
    face.parent_tet = t;
    if (n_neg == 1 || n_pos == 1) {
      const Index apex = n_neg == 1 ? neg[0] : pos[0];
      const auto& others = n_neg == 1 ? pos : neg;
      face.vertices = {cut(apex, others[0]), cut(apex, others[1]), cut(apex, others[2])};
    } else if (n_neg == 2) {
      face.vertices = {cut(neg[0], pos[0]), cut(neg[0], pos[1]), cut(neg[1], pos[1]),
                       cut(neg[1], pos[0])};
    } else {
      continue;
    }
    raw.faces.push_back(std::move(face));
  }
  return raw;
}

std::array<Vec3, 3> TraceMesh::corners(Index t) const {
  const auto& tri = triangles[t];
  return {vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]};
}

double TraceMesh::area(Index t) const {
  const auto c = corners(t);
  return 0.5 * (c[1] - c[0]).cross(c[2] - c[0]).norm();
}

double max_interior_angle(const Vec3& a, const Vec3& b, const Vec3& c) {
  const auto angle = [](const Vec3& apex, const Vec3& p, const Vec3& q) {
    const Vec3 u = p - apex;
    const Vec3 v = q - apex;
    return std::atan2(u.cross(v).norm(), u.dot(v));
  };
  return std::max({angle(a, b, c), angle(b, c, a), angle(c, a, b)});
}

namespace {

using Tri = std::array<Index, 3>;

struct EdgeIncidence {
  std::array<Index, 2> vertices{};
  std::vector<Index> triangles;
};

Vec3 raw_normal(const std::vector<Vec3>& x, const Tri& t) {
  return (x[t[1]] - x[t[0]]).cross(x[t[2]] - x[t[0]]);
}

// Triangles produced from a quadrilateral q0 q1 q2 q3.
std::array<Tri, 2> split_quad(const std::vector<Vec3>& x, const std::vector<Index>& q, double h_scale) {
  const Vec3 n = (x[q[2]] - x[q[0]]).cross(x[q[3]] - x[q[1]]);
  const double nn = n.norm();
  if (nn > 0.0) {
    const Vec3 c = 0.25 * (x[q[0]] + x[q[1]] + x[q[2]] + x[q[3]]);
    double off = 0.0;
    for (Index v : q) off = std::max(off, std::abs(n.dot(x[v] - c)) / nn);
    if (off > 1e-10 * std::max(h_scale, 1.0)) throw Error("bisect_quads: cut quadrilateral is not planar");
  }
  const std::array<Tri, 2> a{Tri{q[0], q[1], q[2]}, Tri{q[0], q[2], q[3]}};
  const std::array<Tri, 2> b{Tri{q[0], q[1], q[3]}, Tri{q[1], q[2], q[3]}};
  const auto worst = [&](const std::array<Tri, 2>& s) {
    return std::max(max_interior_angle(x[s[0][0]], x[s[0][1]], x[s[0][2]]),
                    max_interior_angle(x[s[1][0]], x[s[1][1]], x[s[1][2]]));
  };
  const double wa = worst(a);
  const double wb = worst(b);
  if (std::abs(wa - wb) <= 1e-12) {
    const auto pa = std::minmax(q[0], q[2]);
    const auto pb = std::minmax(q[1], q[3]);
    return pa <= pb ? a : b;
  }
  return wa < wb ? a : b;
}

}  // namespace

TraceMesh bisect_quads(const RawSurface& raw, const SurfaceField& surface) {
  TraceMesh mesh;
  mesh.vertices = raw.vertices;

  double scale = 0.0;
  for (const Vec3& v : raw.vertices) scale = std::max(scale, v.cwiseAbs().maxCoeff());

  for (const RawFace& f : raw.faces) {
    if (f.vertices.size() == 3) {
      mesh.triangles.push_back({f.vertices[0], f.vertices[1], f.vertices[2]});
      mesh.parent_tet.push_back(f.parent_tet);
    } else if (f.vertices.size() == 4) {
      for (const Tri& t : split_quad(raw.vertices, f.vertices, scale)) {
        mesh.triangles.push_back(t);
        mesh.parent_tet.push_back(f.parent_tet);
      }
    } else {
      throw Error("bisect_quads: faces must have 3 or 4 vertices");
    }
  }
  const std::size_t nt = mesh.triangles.size();

  // Edge incidence.
  std::unordered_map<std::uint64_t, Index> edge_ids;
  std::vector<EdgeIncidence> incidence;
  mesh.triangle_edges.resize(nt);
  for (Index t = 0; t < nt; ++t) {
    for (int k = 0; k < 3; ++k) {
      const Index a = mesh.triangles[t][static_cast<std::size_t>((k + 1) % 3)];
      const Index b = mesh.triangles[t][static_cast<std::size_t>((k + 2) % 3)];
      const auto [it, inserted] = edge_ids.try_emplace(edge_key(a, b), incidence.size());
      if (inserted) incidence.push_back({{std::min(a, b), std::max(a, b)}, {}});
      incidence[it->second].triangles.push_back(t);
      mesh.triangle_edges[t][static_cast<std::size_t>(k)] = it->second;
    }
  }
  for (const auto& e : incidence) {
    if (e.triangles.size() != 2) {
      throw Error("bisect_quads: non-manifold surface (edge with " +
                  std::to_string(e.triangles.size()) + " incident faces)");
    }
  }

  // Direction in which triangle t traverses edge e: +1 for low -> high.
  const auto direction = [&](Index t, Index e) {
    const auto& tri = mesh.triangles[t];
    for (std::size_t k = 0; k < 3; ++k) {
      if (mesh.triangle_edges[t][k] == e) {
        return tri[(k + 1) % 3] < tri[(k + 2) % 3] ? 1 : -1;
      }
    }
    throw Error("bisect_quads: inconsistent edge incidence");
  };
  const auto flip = [&](Index t) {
    std::swap(mesh.triangles[t][1], mesh.triangles[t][2]);
    std::swap(mesh.triangle_edges[t][1], mesh.triangle_edges[t][2]);
  };

  // Breadth-first propagation of a consistent orientation, per component.
  std::vector<int> component(nt, -1);
  int n_components = 0;
  for (Index seed = 0; seed < nt; ++seed) {
    if (component[seed] >= 0) continue;
    const int c = n_components++;
    std::queue<Index> queue;
    queue.push(seed);
    component[seed] = c;
    std::vector<Index> members;
    while (!queue.empty()) {
      const Index t = queue.front();
      queue.pop();
      members.push_back(t);
      for (std::size_t k = 0; k < 3; ++k) {
        const Index e = mesh.triangle_edges[t][k];
        const auto& tris = incidence[e].triangles;
        const Index nb = tris[0] == t ? tris[1] : tris[0];
        if (component[nb] < 0) {
          if (direction(nb, e) == direction(t, e)) flip(nb);
          component[nb] = c;
          queue.push(nb);
        } else if (direction(nb, e) == direction(t, e)) {
          throw Error("bisect_quads: surface is not orientable");
        }
      }
    }
    double outward = 0.0;
    for (Index t : members) {
      const auto& tri = mesh.triangles[t];
      const Vec3 n = raw_normal(mesh.vertices, tri);
      const Vec3 centroid = (mesh.vertices[tri[0]] + mesh.vertices[tri[1]] + mesh.vertices[tri[2]]) / 3.0;
      outward += n.dot(surface.gradient(centroid));
    }
    if (outward < 0.0) {
      for (Index t : members) flip(t);
    }
  }

  // Cyclic rotation putting the shortest edge at local edge 2, so that the
  // edge vectors from local vertex 0 span the triangle without cancellation.
  for (Index t = 0; t < nt; ++t) {
    const auto& tri = mesh.triangles[t];
    std::size_t shortest = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < 3; ++k) {
      const double l = (mesh.vertices[tri[(k + 2) % 3]] - mesh.vertices[tri[(k + 1) % 3]]).norm();
      if (l < best) best = l, shortest = k;
    }
    const std::size_t r = (shortest + 1) % 3;
    const auto old_tri = mesh.triangles[t];
    const auto old_edges = mesh.triangle_edges[t];
    for (std::size_t j = 0; j < 3; ++j) {
      mesh.triangles[t][j] = old_tri[(j + r) % 3];
      mesh.triangle_edges[t][j] = old_edges[(j + r) % 3];
    }
  }

  mesh.edges.resize(incidence.size());
  mesh.edge_signs.resize(nt);
  for (Index e = 0; e < incidence.size(); ++e) {
    const auto& inc = incidence[e];
    MeshEdge edge;
    edge.vertices = inc.vertices;
    const bool first_positive = direction(inc.triangles[0], e) > 0;
    edge.triangles = first_positive ? std::array<Index, 2>{inc.triangles[0], inc.triangles[1]}
                                    : std::array<Index, 2>{inc.triangles[1], inc.triangles[0]};
    mesh.edges[e] = edge;
  }
  mesh.face_normals.resize(nt);
  for (Index t = 0; t < nt; ++t) {
    for (std::size_t k = 0; k < 3; ++k) {
      mesh.edge_signs[t][k] = direction(t, mesh.triangle_edges[t][k]);
    }
    const auto c = mesh.corners(t);
    const Vec3 n = (c[1] - c[0]).cross(c[2] - c[0]);
    if (!(n.norm() > 0.0)) throw Error("bisect_quads: degenerate triangle");
    mesh.face_normals[t] = n.normalized();
    mesh.h = std::max({mesh.h, (c[1] - c[0]).norm(), (c[2] - c[1]).norm(), (c[0] - c[2]).norm()});
  }
  return mesh;
}

TraceMesh build_trace_mesh(const SurfaceField& surface, const Box& box, int n, const Vec3& offset,
                           double shift) {
  Box shifted = box;
  shifted.lo += offset;
  shifted.hi += offset;
  const BulkMesh bulk = build_bulk_mesh(shifted, n);
  const RawSurface raw =
      extract_trace_surface(bulk, [&surface](const Vec3& x) { return surface.signed_distance(x); }, shift);
  TraceMesh mesh = bisect_quads(raw, surface);
  mesh.h_bulk = bulk.h_bulk;
  return mesh;
}

MeshStats mesh_stats(const TraceMesh& mesh, const SurfaceField& surface) {
  MeshStats s;
  s.h = mesh.h;
  s.n_triangles = mesh.n_triangles();
  s.euler_characteristic = mesh.euler_characteristic();
  s.min_transversality = std::numeric_limits<double>::infinity();
  s.min_area = std::numeric_limits<double>::infinity();
  const Quadrature q = triangle_rule(kErrorDegree);
  for (Index t = 0; t < mesh.n_triangles(); ++t) {
    const auto c = mesh.corners(t);
    s.max_angle = std::max(s.max_angle, max_interior_angle(c[0], c[1], c[2]));
    const double a = mesh.area(t);
    s.min_area = std::min(s.min_area, a);
    s.max_area = std::max(s.max_area, a);
    const Vec3& nu_h = mesh.face_normals[t];
    for (const Vec2& xi : q.points) {
      const Vec3 x = c[0] + xi[0] * (c[1] - c[0]) + xi[1] * (c[2] - c[0]);
      s.max_abs_d = std::max(s.max_abs_d, std::abs(surface.signed_distance(x)));
      const Vec3 nu = surface.gradient(x);
      s.max_normal_deviation = std::max(s.max_normal_deviation, (nu - nu_h).norm());
      s.min_transversality = std::min(s.min_transversality, nu.dot(nu_h));
    }
  }
  s.area_ratio = s.max_area > 0.0 ? s.min_area / s.max_area : 0.0;
  return s;
}

void write_off(std::ostream& os, const TraceMesh& mesh) {
  os << "OFF\n" << mesh.vertices.size() << ' ' << mesh.triangles.size() << ' '
     << mesh.edges.size() << '\n';
  os << std::setprecision(17);
  for (const Vec3& v : mesh.vertices) os << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';
  for (const auto& t : mesh.triangles) os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

void write_off(const std::string& path, const TraceMesh& mesh) {
  std::ofstream os(path);
  if (!os) throw Error("write_off: cannot open " + path);
  write_off(os, mesh);
}

std::vector<double> read_vertex_samples(std::istream& is, std::size_t expected_count) {
  std::vector<double> values;
  values.reserve(expected_count);
  double v = 0.0;
  while (is >> v) values.push_back(v);
  if (!is.eof()) throw Error("read_vertex_samples: malformed value");
  if (values.size() != expected_count) {
    throw Error("read_vertex_samples: expected " + std::to_string(expected_count) +
                " values, got " + std::to_string(values.size()));
  }
  return values;
}

std::vector<double> read_vertex_samples(const std::string& path, std::size_t expected_count) {
  std::ifstream is(path);
  if (!is) throw Error("read_vertex_samples: cannot open " + path);
  return read_vertex_samples(is, expected_count);
}

}  // namespace mqt
