#pragma once

#include "mqt/elements.hpp"
#include "mqt/postprocess.hpp"
#include "mqt/trace_mesh.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace mqt {

enum class PostprocessSelection { Neumann, Gradient, Both };

std::string_view to_string(PostprocessSelection s);
PostprocessSelection parse_postprocess(std::string_view name);

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct StudyConfig {
  VectorSpaceKind space = VectorSpaceKind::RT0;
  PostprocessSelection postprocess = PostprocessSelection::Neumann;
  Box box;
  int n0 = 8;
  int levels = 4;
  Vec3 seed_offset = Vec3::Zero();
  std::filesystem::path output_dir = ".";
  bool export_mesh = false;
  bool check_mesh_only = false;
  bool write_files = true;
};

/// Throws ConfigError unless n0 >= 4, levels >= 1 and the box contains the
/// unit sphere with margin >= 0.5 on every side.
void validate(const StudyConfig& config);

struct StudyRow {
  int level = 0;
  double h = 0.0;
  std::size_t n_tri = 0;
  double max_angle = 0.0;
  double max_abs_d = 0.0;
  double err_p = 0.0;
  double err_u = 0.0;
  double err_eu = 0.0;
  double err_post = 0.0;
};

struct StudyTable {
  PostprocessVariant variant = PostprocessVariant::Neumann;
  std::vector<StudyRow> rows;
};

struct LevelDiagnostics {
  int level = 0;
  int n = 0;
  MeshStats mesh;
  GeometricDiagnostics geometry;
  double mean_correction = 0.0;
  double seconds = 0.0;
};

struct ErrorReport {
  VectorSpaceKind space = VectorSpaceKind::RT0;
  std::vector<StudyTable> tables;  ///< empty in check-mesh-only mode
  std::vector<LevelDiagnostics> levels;
  std::vector<std::filesystem::path> files;

  [[nodiscard]] const StudyTable& table(PostprocessVariant v) const;
};

/// Runs all levels n = n0 2^l on the unit sphere with u = sin(x) + y + z^3.
/// Progress goes to `log` when given.
ErrorReport run_study(const StudyConfig& config, std::ostream* log = nullptr);

std::string format_csv(const std::vector<StudyRow>& rows);
std::vector<StudyRow> parse_csv(const std::string& text);

/// Static log-log plot of the four error series with slope 1 and 2 guides.
std::string render_svg(const std::vector<StudyRow>& rows, const std::string& title);

std::string format_mesh_csv(const std::vector<LevelDiagnostics>& levels);

}  // namespace mqt
