#include "mqt/study.hpp"

#include <CLI11.hpp>

#include <array>
#include <iostream>
#include <vector>

int main(int argc, char** argv) {
  CLI::App app{"Mixed surface FEM convergence study on trace meshes of the unit sphere"};
  std::string space = "rt0";
  std::string post = "neumann";
  int n0 = 8;
  int levels = 4;
  std::vector<double> box{-2.0, 2.0, -2.0, 2.0, -2.0, 2.0};
  std::vector<double> offset{0.0, 0.0, 0.0};
  std::string out = ".";
  bool export_mesh = false;
  bool check_mesh_only = false;

  app.add_option("--space", space, "vector space")->check(CLI::IsMember({"rt0", "bdm1"}));
  app.add_option("--postprocess", post, "postprocessing variant")
      ->check(CLI::IsMember({"neumann", "gradient", "both"}));
  app.add_option("--n0", n0, "bulk subdivisions per axis on level 0");
  app.add_option("--levels", levels, "number of refinement levels");
  app.add_option("--box", box, "bulk box x0 x1 y0 y1 z0 z1")->expected(6);
  app.add_option("--seed-offset", offset, "shift of the bulk grid dx dy dz")->expected(3);
  app.add_option("--out", out, "output directory");
  app.add_flag("--export-mesh", export_mesh, "write mesh_level<l>.off per level");
  app.add_flag("--check-mesh-only", check_mesh_only, "build meshes and report quality only");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  mqt::StudyConfig config;
  try {
    config.space = mqt::parse_vector_space(space);
    config.postprocess = mqt::parse_postprocess(post);
    config.n0 = n0;
    config.levels = levels;
    config.box.lo = mqt::Vec3(box[0], box[2], box[4]);
    config.box.hi = mqt::Vec3(box[1], box[3], box[5]);
    config.seed_offset = mqt::Vec3(offset[0], offset[1], offset[2]);
    config.output_dir = out;
    config.export_mesh = export_mesh;
    config.check_mesh_only = check_mesh_only;
    mqt::validate(config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    const mqt::ErrorReport report = mqt::run_study(config, &std::cout);
    for (const auto& path : report.files) std::cout << "wrote " << path.string() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
