#include "mqt/study.hpp"

#include "mqt/assembly.hpp"
#include "mqt/geometry.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace mqt {

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw Error("failed writing " + path.string());
}

std::string number(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

std::string csv_name(PostprocessVariant v, bool both) {
  if (both && v == PostprocessVariant::Gradient) return "study_gradient";
  return "study";
}

std::vector<PostprocessVariant> variants(PostprocessSelection s) {
  switch (s) {
    case PostprocessSelection::Neumann: return {PostprocessVariant::Neumann};
    case PostprocessSelection::Gradient: return {PostprocessVariant::Gradient};
    case PostprocessSelection::Both: return {PostprocessVariant::Neumann, PostprocessVariant::Gradient};
  }
  return {};
}

}  // namespace

std::string_view to_string(PostprocessSelection s) {
  switch (s) {
    case PostprocessSelection::Neumann: return "neumann";
    case PostprocessSelection::Gradient: return "gradient";
    case PostprocessSelection::Both: return "both";
  }
  return "?";
}

PostprocessSelection parse_postprocess(std::string_view name) {
  if (name == "neumann") return PostprocessSelection::Neumann;
  if (name == "gradient") return PostprocessSelection::Gradient;
  if (name == "both") return PostprocessSelection::Both;
  throw ConfigError("unknown postprocess variant '" + std::string(name) + "'");
}

void validate(const StudyConfig& config) {
  if (config.n0 < 4) throw ConfigError("n0 must be >= 4");
  if (config.levels < 1) throw ConfigError("levels must be >= 1");
  for (int k = 0; k < 3; ++k) {
    if (!(config.box.lo[k] <= -1.5) || !(config.box.hi[k] >= 1.5)) {
      throw ConfigError("box must contain the unit sphere with margin >= 0.5");
    }
  }
  if (!config.seed_offset.allFinite()) throw ConfigError("seed offset must be finite");
}

const StudyTable& ErrorReport::table(PostprocessVariant v) const {
  for (const StudyTable& t : tables) {
    if (t.variant == v) return t;
  }
  throw Error("no table for postprocess variant " + std::string(to_string(v)));
}

ErrorReport run_study(const StudyConfig& config, std::ostream* log) {
  validate(config);
  const Sphere sphere(1.0);
  const ManufacturedProblem problem = manufactured_sphere();
  const VectorReferenceSpace space(config.space);
  const std::vector<PostprocessVariant> vs = variants(config.postprocess);

  ErrorReport report;
  report.space = config.space;
  if (!config.check_mesh_only) {
    for (PostprocessVariant v : vs) report.tables.push_back({v, {}});
  }
  if (config.write_files) std::filesystem::create_directories(config.output_dir);

  for (int level = 0; level < config.levels; ++level) {
    const auto start = std::chrono::steady_clock::now();
    const int n = config.n0 << level;
    const std::string context = "level " + std::to_string(level) + " (n = " + std::to_string(n) + ")";
    const TraceMesh mesh = build_trace_mesh(sphere, config.box, n, config.seed_offset);
    LevelDiagnostics diag;
    diag.level = level;
    diag.n = n;
    diag.mesh = mesh_stats(mesh, sphere);
    if (diag.mesh.euler_characteristic != 2) {
      throw Error(context + ": trace mesh has Euler characteristic " +
                  std::to_string(diag.mesh.euler_characteristic) + ", expected 2");
    }
    if (!(diag.mesh.min_transversality > 0.0)) {
      throw Error(context + ": discrete normal is not transversal to the surface normal");
    }
    if (config.export_mesh && config.write_files) {
      const auto path = config.output_dir / ("mesh_level" + std::to_string(level) + ".off");
      write_off(path.string(), mesh);
      report.files.push_back(path);
    }

    if (!config.check_mesh_only) {
      diag.geometry = geometric_diagnostics(mesh, sphere);
      const RightHandSide f_h = build_rhs(problem.f, mesh, sphere);
      diag.mean_correction = f_h.mean_correction();
      if (log && f_h.warning()) *log << context << ": " << *f_h.warning() << '\n';
      SolveOptions opts;
      opts.context = context;
      const SolutionFields fields = solve_hybrid(mesh, space, f_h, opts);
      for (StudyTable& table : report.tables) {
        ErrorOptions eopts;
        eopts.variant = table.variant;
        const ErrorRow e = compute_errors(mesh, sphere, space, problem, fields, f_h, eopts);
        table.rows.push_back({level, mesh.h_bulk, mesh.n_triangles(), diag.mesh.max_angle, diag.mesh.max_abs_d,
                              e.err_p, e.err_u, e.err_eu, e.err_post});
      }
    }
    diag.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (log) {
      *log << context << ": " << mesh.n_triangles() << " triangles, max angle " << diag.mesh.max_angle
           << ", max |d| " << diag.mesh.max_abs_d;
      if (!config.check_mesh_only) {
        const StudyRow& r = report.tables.front().rows.back();
        *log << ", err_p " << r.err_p << ", err_u " << r.err_u << ", err_eu " << r.err_eu << ", err_post "
             << r.err_post;
      }
      *log << " [" << std::setprecision(3) << diag.seconds << " s]" << std::setprecision(6) << '\n';
    }
    report.levels.push_back(diag);
  }

  if (config.write_files) {
    if (config.check_mesh_only) {
      const auto path = config.output_dir / "mesh.csv";
      write_text(path, format_mesh_csv(report.levels));
      report.files.push_back(path);
    }
    const bool both = config.postprocess == PostprocessSelection::Both;
    for (const StudyTable& table : report.tables) {
      const std::string stem = csv_name(table.variant, both);
      const auto csv_path = config.output_dir / (stem + ".csv");
      write_text(csv_path, format_csv(table.rows));
      report.files.push_back(csv_path);

      std::ifstream is(csv_path, std::ios::binary);
      std::stringstream buffer;
      buffer << is.rdbuf();
      const std::string title = std::string(to_string(config.space)) + ", " +
                                std::string(to_string(table.variant)) + " postprocessing";
      const auto svg_path = config.output_dir / (stem + ".svg");
      write_text(svg_path, render_svg(parse_csv(buffer.str()), title));
      report.files.push_back(svg_path);
    }
  }
  return report;
}

std::string format_csv(const std::vector<StudyRow>& rows) {
  std::vector<double> hs;
  std::vector<double> ep, eu, eeu, epost;
  for (const StudyRow& r : rows) {
    hs.push_back(r.h);
    ep.push_back(r.err_p);
    eu.push_back(r.err_u);
    eeu.push_back(r.err_eu);
    epost.push_back(r.err_post);
  }
  const std::vector<std::vector<std::optional<double>>> rates = {eoc(ep, hs), eoc(eu, hs), eoc(eeu, hs),
                                                                  eoc(epost, hs)};
  std::ostringstream os;
  os << "level,h,n_tri,max_angle,max_abs_d,err_p,err_u,err_eu,err_post,rate_p,rate_u,rate_eu,rate_post\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const StudyRow& r = rows[i];
    os << r.level << ',' << number(r.h) << ',' << r.n_tri << ',' << number(r.max_angle) << ','
       << number(r.max_abs_d) << ',' << number(r.err_p) << ',' << number(r.err_u) << ',' << number(r.err_eu)
       << ',' << number(r.err_post);
    for (const auto& series : rates) {
      os << ',';
      if (i == 0) continue;
      const std::optional<double>& rate = series[i - 1];
      os << (rate ? number(*rate) : std::string("nan"));
    }
    os << '\n';
  }
  return os.str();
}

std::vector<StudyRow> parse_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line.rfind("level,h,n_tri,", 0) != 0) throw Error("parse_csv: missing header");
  std::vector<StudyRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() < 9) throw Error("parse_csv: short row '" + line + "'");
    StudyRow r;
    try {
      r.level = std::stoi(cells[0]);
      r.h = std::stod(cells[1]);
      r.n_tri = std::stoul(cells[2]);
      r.max_angle = std::stod(cells[3]);
      r.max_abs_d = std::stod(cells[4]);
      r.err_p = std::stod(cells[5]);
      r.err_u = std::stod(cells[6]);
      r.err_eu = std::stod(cells[7]);
      r.err_post = std::stod(cells[8]);
    } catch (const std::exception&) {
      throw Error("parse_csv: malformed row '" + line + "'");
    }
    rows.push_back(r);
  }
  return rows;
}

std::string render_svg(const std::vector<StudyRow>& rows, const std::string& title) {
  constexpr double width = 640.0;
  constexpr double height = 480.0;
  constexpr double left = 80.0;
  constexpr double right = 170.0;
  constexpr double top = 40.0;
  constexpr double bottom = 60.0;

  struct Series {
    const char* name;
    const char* color;
    double StudyRow::*field;
  };
  const Series series[] = {{"err_p", "#1f77b4", &StudyRow::err_p},
                           {"err_u", "#d62728", &StudyRow::err_u},
                           {"err_eu", "#2ca02c", &StudyRow::err_eu},
                           {"err_post", "#9467bd", &StudyRow::err_post}};

  double hmin = std::numeric_limits<double>::infinity();
  double hmax = 0.0;
  double emin = std::numeric_limits<double>::infinity();
  double emax = 0.0;
  for (const StudyRow& r : rows) {
    if (r.h > 0.0) {
      hmin = std::min(hmin, r.h);
      hmax = std::max(hmax, r.h);
    }
    for (const Series& s : series) {
      const double e = r.*s.field;
      if (e > 0.0) {
        emin = std::min(emin, e);
        emax = std::max(emax, e);
      }
    }
  }
  if (!(hmax > 0.0)) {
    hmin = 0.1;
    hmax = 1.0;
  }
  if (!(emax > 0.0)) {
    emin = 1e-3;
    emax = 1.0;
  }
  const double lx0 = std::floor(std::log10(hmin) * 4.0) / 4.0 - 0.1;
  const double lx1 = std::ceil(std::log10(hmax) * 4.0) / 4.0 + 0.1;
  const double ly0 = std::floor(std::log10(emin)) - 0.5;
  const double ly1 = std::ceil(std::log10(emax));
  const double pw = width - left - right;
  const double ph = height - top - bottom;
  const auto px = [&](double h) { return left + (std::log10(h) - lx0) / (lx1 - lx0) * pw; };
  const auto py = [&](double e) { return top + (ly1 - std::log10(e)) / (ly1 - ly0) * ph; };

  std::ostringstream os;
  os << std::setprecision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << left + pw / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << title
     << "</text>\n";
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int k = static_cast<int>(std::ceil(ly0)); k <= static_cast<int>(std::floor(ly1)); ++k) {
    const double y = py(std::pow(10.0, k));
    os << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << left + pw << "\" y2=\"" << y
       << "\" stroke=\"#dddddd\"/>\n";
    os << "<text x=\"" << left - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">1e" << k << "</text>\n";
  }
  for (const StudyRow& r : rows) {
    if (!(r.h > 0.0)) continue;
    const double x = px(r.h);
    os << "<line x1=\"" << x << "\" y1=\"" << top << "\" x2=\"" << x << "\" y2=\"" << top + ph
       << "\" stroke=\"#dddddd\"/>\n";
    os << "<text x=\"" << x << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\">" << number(r.h)
       << "</text>\n";
  }
  os << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 16 << "\" text-anchor=\"middle\">h</text>\n";
  os << "<text x=\"20\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
     << top + ph / 2 << ")\">L2 error</text>\n";

  double legend_y = top + 10;
  for (const Series& s : series) {
    os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\" points=\"";
    bool first = true;
    for (const StudyRow& r : rows) {
      const double e = r.*s.field;
      if (!(e > 0.0) || !(r.h > 0.0)) continue;
      os << (first ? "" : " ") << px(r.h) << ',' << py(e);
      first = false;
    }
    os << "\"/>\n";
    for (const StudyRow& r : rows) {
      const double e = r.*s.field;
      if (!(e > 0.0) || !(r.h > 0.0)) continue;
      os << "<circle cx=\"" << px(r.h) << "\" cy=\"" << py(e) << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
    }
    os << "<line x1=\"" << left + pw + 15 << "\" y1=\"" << legend_y << "\" x2=\"" << left + pw + 40
       << "\" y2=\"" << legend_y << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << left + pw + 46 << "\" y=\"" << legend_y + 4 << "\">" << s.name << "</text>\n";
    legend_y += 20;
  }

  // Slope guides anchored below the smallest error at the finest mesh.
  const double hr = hmin * std::pow(10.0, 0.15);
  const double hl = hmin * std::pow(10.0, 0.15 + 0.3);
  const double base = emin * std::pow(10.0, -0.25);
  for (int slope : {1, 2}) {
    const double e_lo = base * (slope == 1 ? 8.0 : 1.0);
    const double e_hi = e_lo * std::pow(hl / hr, slope);
    const double x0 = px(hr);
    const double x1 = px(hl);
    os << "<polygon fill=\"none\" stroke=\"#555555\" stroke-dasharray=\"4 2\" points=\"" << x0 << ','
       << py(e_lo) << ' ' << x1 << ',' << py(e_lo) << ' ' << x1 << ',' << py(e_hi) << "\"/>\n";
    os << "<text x=\"" << x1 + 4 << "\" y=\"" << (py(e_lo) + py(e_hi)) / 2 << "\">" << slope << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string format_mesh_csv(const std::vector<LevelDiagnostics>& levels) {
  std::ostringstream os;
  os << "level,n,h,n_tri,euler,max_angle,max_abs_d,min_transversality,max_normal_deviation,area_ratio\n";
  for (const LevelDiagnostics& d : levels) {
    os << d.level << ',' << d.n << ',' << number(d.mesh.h) << ',' << d.mesh.n_triangles << ','
       << d.mesh.euler_characteristic << ',' << number(d.mesh.max_angle) << ',' << number(d.mesh.max_abs_d)
       << ',' << number(d.mesh.min_transversality) << ',' << number(d.mesh.max_normal_deviation) << ','
       << number(d.mesh.area_ratio) << '\n';
  }
  return os.str();
}

}  // namespace mqt
