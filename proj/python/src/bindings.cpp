#include "mqt/assembly.hpp"
#include "mqt/postprocess.hpp"
#include "mqt/study.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using IndexMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

RowMatrix points(const std::vector<mqt::Vec3>& v) {
  RowMatrix m(static_cast<Eigen::Index>(v.size()), 3);
  for (std::size_t i = 0; i < v.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = v[i].transpose();
  return m;
}

template <std::size_t N>
IndexMatrix indices(const std::vector<std::array<mqt::Index, N>>& v) {
  IndexMatrix m(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(N));
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t j = 0; j < N; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = static_cast<std::int64_t>(v[i][j]);
    }
  }
  return m;
}

mqt::Box make_box(const std::array<double, 6>& b) {
  mqt::Box box;
  box.lo = mqt::Vec3(b[0], b[2], b[4]);
  box.hi = mqt::Vec3(b[1], b[3], b[5]);
  return box;
}

py::dict row_dict(const mqt::StudyRow& r) {
  py::dict d;
  d["level"] = r.level;
  d["h"] = r.h;
  d["n_tri"] = r.n_tri;
  d["max_angle"] = r.max_angle;
  d["max_abs_d"] = r.max_abs_d;
  d["err_p"] = r.err_p;
  d["err_u"] = r.err_u;
  d["err_eu"] = r.err_eu;
  d["err_post"] = r.err_post;
  return d;
}

}  // namespace

PYBIND11_MODULE(_mqtrace, m) {
  m.doc() = "Mixed finite elements for the Laplace-Beltrami problem on trace meshes of the unit sphere.";

  py::register_exception<mqt::Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<mqt::ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<mqt::MeshStats>(m, "MeshStats")
      .def_readonly("h", &mqt::MeshStats::h)
      .def_readonly("n_triangles", &mqt::MeshStats::n_triangles)
      .def_readonly("euler_characteristic", &mqt::MeshStats::euler_characteristic)
      .def_readonly("max_angle", &mqt::MeshStats::max_angle)
      .def_readonly("max_abs_d", &mqt::MeshStats::max_abs_d)
      .def_readonly("max_normal_deviation", &mqt::MeshStats::max_normal_deviation)
      .def_readonly("min_transversality", &mqt::MeshStats::min_transversality)
      .def_readonly("min_area", &mqt::MeshStats::min_area)
      .def_readonly("max_area", &mqt::MeshStats::max_area);

  py::class_<mqt::TraceMesh>(m, "TraceMesh")
      .def_property_readonly("vertices", [](const mqt::TraceMesh& t) { return points(t.vertices); })
      .def_property_readonly("triangles", [](const mqt::TraceMesh& t) { return indices(t.triangles); })
      .def_property_readonly("face_normals", [](const mqt::TraceMesh& t) { return points(t.face_normals); })
      .def_property_readonly("edges", [](const mqt::TraceMesh& t) {
        std::vector<std::array<mqt::Index, 2>> e;
        for (const auto& edge : t.edges) e.push_back(edge.vertices);
        return indices(e);
      })
      .def_readonly("h", &mqt::TraceMesh::h)
      .def_readonly("h_bulk", &mqt::TraceMesh::h_bulk)
      .def_property_readonly("n_triangles", &mqt::TraceMesh::n_triangles)
      .def_property_readonly("n_edges", &mqt::TraceMesh::n_edges)
      .def("euler_characteristic", &mqt::TraceMesh::euler_characteristic)
      .def("stats", [](const mqt::TraceMesh& t) { return mqt::mesh_stats(t, mqt::Sphere(1.0)); });

  m.def(
      "sphere_mesh",
      [](int n, const std::array<double, 6>& box, const std::array<double, 3>& offset) {
        return mqt::build_trace_mesh(mqt::Sphere(1.0), make_box(box), n, mqt::Vec3(offset[0], offset[1], offset[2]));
      },
      py::arg("n"), py::arg("box") = std::array<double, 6>{-2, 2, -2, 2, -2, 2},
      py::arg("offset") = std::array<double, 3>{0, 0, 0}, "Trace mesh of the unit sphere on an n^3 Kuhn grid.");

  m.def(
      "solve",
      [](const mqt::TraceMesh& mesh, const std::string& space, const std::string& postprocess) {
        const mqt::Sphere sphere(1.0);
        const mqt::ManufacturedProblem problem = mqt::manufactured_sphere();
        const mqt::VectorReferenceSpace vs(mqt::parse_vector_space(space));
        const mqt::PostprocessSelection sel = mqt::parse_postprocess(postprocess);
        if (sel == mqt::PostprocessSelection::Both) throw mqt::ConfigError("solve: choose neumann or gradient");
        const mqt::RightHandSide f_h = mqt::build_rhs(problem.f, mesh, sphere);
        const mqt::SolutionFields fields = mqt::solve_hybrid(mesh, vs, f_h);
        mqt::ErrorOptions opts;
        opts.variant = sel == mqt::PostprocessSelection::Neumann ? mqt::PostprocessVariant::Neumann
                                                                 : mqt::PostprocessVariant::Gradient;
        const mqt::ErrorRow e = mqt::compute_errors(mesh, sphere, vs, problem, fields, f_h, opts);
        py::dict d;
        d["u"] = Eigen::VectorXd(fields.u);
        d["p"] = RowMatrix(fields.p);
        d["multipliers"] = Eigen::VectorXd(fields.multipliers);
        py::dict errors;
        errors["h"] = e.h;
        errors["err_p"] = e.err_p;
        errors["err_u"] = e.err_u;
        errors["err_eu"] = e.err_eu;
        errors["err_post"] = e.err_post;
        d["errors"] = errors;
        return d;
      },
      py::arg("mesh"), py::arg("space") = "rt0", py::arg("postprocess") = "neumann",
      "Solve the manufactured sphere problem on a trace mesh; returns fields and errors.");

  m.def(
      "run_study",
      [](const std::string& space, const std::string& postprocess, int n0, int levels,
         const std::array<double, 6>& box, const std::array<double, 3>& offset,
         const std::optional<std::filesystem::path>& out, bool export_mesh, bool check_mesh_only) {
        mqt::StudyConfig c;
        c.space = mqt::parse_vector_space(space);
        c.postprocess = mqt::parse_postprocess(postprocess);
        c.n0 = n0;
        c.levels = levels;
        c.box = make_box(box);
        c.seed_offset = mqt::Vec3(offset[0], offset[1], offset[2]);
        c.write_files = out.has_value();
        if (out) c.output_dir = *out;
        c.export_mesh = export_mesh;
        c.check_mesh_only = check_mesh_only;
        const mqt::ErrorReport report = mqt::run_study(c);
        py::dict tables;
        for (const mqt::StudyTable& t : report.tables) {
          py::list rows;
          for (const mqt::StudyRow& r : t.rows) rows.append(row_dict(r));
          tables[py::str(std::string(mqt::to_string(t.variant)))] = rows;
        }
        py::list meshes;
        for (const mqt::LevelDiagnostics& d : report.levels) meshes.append(d.mesh);
        py::dict result;
        result["tables"] = tables;
        result["meshes"] = meshes;
        result["files"] = report.files;
        return result;
      },
      py::arg("space") = "rt0", py::arg("postprocess") = "neumann", py::arg("n0") = 8, py::arg("levels") = 4,
      py::arg("box") = std::array<double, 6>{-2, 2, -2, 2, -2, 2}, py::arg("offset") = std::array<double, 3>{0, 0, 0},
      py::arg("out") = py::none(), py::arg("export_mesh") = false, py::arg("check_mesh_only") = false,
      "Convergence study; writes study.csv/study.svg when `out` is given.");

  m.def("eoc", &mqt::eoc, py::arg("errors"), py::arg("hs"), "Observed orders; None where undefined.");
}
