#pragma once

#include "mqt/geometry.hpp"
#include "mqt/types.hpp"

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace mqt {

/// Axis-aligned box [lo.x, hi.x] x [lo.y, hi.y] x [lo.z, hi.z].
struct Box {
  Vec3 lo{-2.0, -2.0, -2.0};
  Vec3 hi{2.0, 2.0, 2.0};
};

/// Kuhn (Freudenthal) tetrahedral decomposition of a box.
struct BulkMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<Index, 4>> tets;
  double h_bulk = 0.0;

  [[nodiscard]] double signed_volume(Index tet) const;
};

/// n^3 cubes, six positively oriented tetrahedra each.
BulkMesh build_bulk_mesh(const Box& box, int n);

using LevelSet = std::function<double(const Vec3&)>;

/// Zero set of the piecewise linear interpolant inside one tetrahedron:
/// a triangle (3 vertices) or a planar quadrilateral (4 vertices, cyclic).
struct RawFace {
  std::vector<Index> vertices;
  Index parent_tet = 0;
};

struct RawSurface {
  std::vector<Vec3> vertices;
  std::vector<RawFace> faces;
  /// Bulk edge (a < b) each surface vertex was cut from.
  std::vector<std::array<Index, 2>> cut_edges;
};

/// Relative size of the shift applied to vertex values that vanish.
inline constexpr double kZeroVertexShift = 1e-6;

/// Vertex values below shift h_bulk in magnitude are replaced by +shift h_bulk.
std::vector<double> perturbed_vertex_values(const BulkMesh& bulk, std::vector<double> values,
                                            double shift = kZeroVertexShift);

RawSurface extract_trace_surface(const BulkMesh& bulk, const LevelSet& psi, double shift = kZeroVertexShift);
/// Same as above from precomputed values, one per bulk vertex.
RawSurface extract_trace_surface(const BulkMesh& bulk, const std::vector<double>& vertex_values,
                                 double shift = kZeroVertexShift);

struct MeshEdge {
  std::array<Index, 2> vertices;   ///< stored with vertices[0] < vertices[1]
  std::array<Index, 2> triangles;  ///< [0] traverses the edge 0 -> 1 counterclockwise
};

/// Conforming, consistently oriented triangulation of the discrete surface.
///
/// Triangles are ordered counterclockwise with respect to the outward normal.
/// Local edge k of a triangle joins its local vertices (k+1)%3 -> (k+2)%3.
struct TraceMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<Index, 3>> triangles;
  std::vector<MeshEdge> edges;
  std::vector<std::array<Index, 3>> triangle_edges;
  /// +1 if local edge k is traversed from edges[..].vertices[0] to [1].
  std::vector<std::array<int, 3>> edge_signs;
  std::vector<Vec3> face_normals;
  std::vector<Index> parent_tet;
  double h = 0.0;       ///< max triangle diameter
  double h_bulk = 0.0;  ///< bulk mesh size, 0 if unknown

  [[nodiscard]] std::size_t n_triangles() const { return triangles.size(); }
  [[nodiscard]] std::size_t n_edges() const { return edges.size(); }
  [[nodiscard]] std::array<Vec3, 3> corners(Index t) const;
  [[nodiscard]] double area(Index t) const;
  [[nodiscard]] long euler_characteristic() const {
    return static_cast<long>(vertices.size()) - static_cast<long>(edges.size()) +
           static_cast<long>(triangles.size());
  }
};

/// Largest interior angle of the triangle (a, b, c).
double max_interior_angle(const Vec3& a, const Vec3& b, const Vec3& c);

/// Splits quadrilaterals along the diagonal minimising the larger of the two
/// max angles, builds edge connectivity and orients every face outward with
/// respect to `surface`.
TraceMesh bisect_quads(const RawSurface& raw, const SurfaceField& surface);

/// Convenience: bulk mesh, extraction with psi = signed distance, bisection.
TraceMesh build_trace_mesh(const SurfaceField& surface, const Box& box, int n,
                           const Vec3& offset = Vec3::Zero(), double shift = kZeroVertexShift);

struct MeshStats {
  double h = 0.0;
  std::size_t n_triangles = 0;
  long euler_characteristic = 0;
  double max_angle = 0.0;
  double max_abs_d = 0.0;
  double max_normal_deviation = 0.0;  ///< max |nu - nu_h|
  double min_transversality = 0.0;    ///< min nu . nu_h
  double min_area = 0.0;
  double max_area = 0.0;
  double area_ratio = 0.0;            ///< min_area / max_area
};

MeshStats mesh_stats(const TraceMesh& mesh, const SurfaceField& surface);

/// ASCII OFF ("OFF", "V F E", vertices, faces).
void write_off(std::ostream& os, const TraceMesh& mesh);
void write_off(const std::string& path, const TraceMesh& mesh);

/// Whitespace-separated values, one per bulk vertex in bulk vertex order.
std::vector<double> read_vertex_samples(std::istream& is, std::size_t expected_count);
std::vector<double> read_vertex_samples(const std::string& path, std::size_t expected_count);

}  // namespace mqt
