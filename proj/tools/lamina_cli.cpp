// lamina: command-line front end for the lamination / schema / dynamics
// library.  Exit codes: 0 success, 1 validation failure, 2 usage error,
// 3 numerical non-convergence.  Identical argv + input files produce
// identical output bytes.

#include <CLI11.hpp>

#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "lamina/angle_system.hpp"
#include "lamina/dynamics.hpp"
#include "lamina/fixtures.hpp"
#include "lamina/io.hpp"
#include "lamina/render.hpp"
#include "lamina/schema.hpp"

namespace {

using namespace lamina;
using nlohmann::json;

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kUsage = 2;
constexpr int kNumerical = 3;

json load_doc(const std::string& path) { return json::parse(io::read_file(path)); }

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

// Writes to the path when given, stdout otherwise.
void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty())
    std::cout << text;
  else
    io::write_file(out_path, text);
}

std::string format_class(const AngleSet& cls) {
  std::string s = "{";
  for (std::size_t i = 0; i < cls.size(); ++i) {
    if (i) s += ", ";
    s += cls[i].str();
  }
  return s + "}";
}

int workers_or_env(int workers) {
  if (workers > 0) return workers;
  if (const char* env = std::getenv("THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 0;
}

Complex parse_complex(const std::string& text) {
  double re = 0.0, im = 0.0;
  const int got = std::sscanf(text.c_str(), "%lf,%lf", &re, &im);
  if (got < 1) throw std::invalid_argument("expected a complex number as re[,im]: " + text);
  return Complex(re, im);
}

AngleSet parse_angle_file(const std::string& text) {
  std::vector<Angle> out;
  const json doc = json::parse(text, nullptr, false);
  if (doc.is_array()) {
    for (const json& entry : doc) out.push_back(Angle::parse(entry.get<std::string>()));
  } else {
    std::string plain = text;
    for (char& c : plain)
      if (c == ',') c = ' ';
    std::istringstream stream(plain);
    std::string token;
    while (stream >> token) out.push_back(Angle::parse(token));
  }
  if (out.empty()) throw std::invalid_argument("no angles found in the --angles file");
  return AngleSet(out);
}

// ---------------------------------------------------------------------------
// fixture construction helpers

SchemaPolynomial unicritical_poly(int degree, Complex constant) {
  MappingSchema schema{{"v0"}, {0}, {degree}, {}};
  std::vector<Complex> coeffs(static_cast<std::size_t>(degree) - 1, Complex(0.0, 0.0));
  coeffs.back() = constant;
  return SchemaPolynomial{schema, {coeffs}};
}

SchemaPolynomial cubic_poly(Complex c1, Complex c0) {
  return SchemaPolynomial{MappingSchema{{"v0"}, {0}, {3}, {}}, {{c1, c0}}};
}

SchemaPolynomial tcap_poly() {
  MappingSchema schema{{"v0", "v1"}, {0, 0}, {2, 2}, {}};
  return SchemaPolynomial{schema, {{Complex(-1.0, 0.0)}, {Complex(-1.0, 0.0)}}};
}

// z^3 + a2 z^2 + a1 z recentred by w -> w + beta, beta = -a2/3.
SchemaPolynomial centred_cubic(Complex a2, Complex a1) {
  const Complex beta = -a2 / 3.0;
  const Complex c1 = 3.0 * beta * beta + 2.0 * a2 * beta + a1;
  const Complex c0 = beta * beta * beta + a2 * beta * beta + a1 * beta - beta;
  return cubic_poly(c1, c0);
}

// The one-parameter cubic family with fixed-point multipliers mu and its
// conjugate; mu = 0 gives z^3 + 3z/2.  Singular along Re mu = 1.
SchemaPolynomial fmu_poly(Complex mu) {
  const double zeta = mu.real(), xi = mu.imag();
  if (zeta == 1.0) throw std::invalid_argument("the normal form is singular along Re mu = 1");
  const Complex a2 = -2.0 * xi / std::sqrt(Complex(2.0 * (1.0 - zeta), 0.0));
  const Complex a1(-0.25 * (2.0 * zeta - 6.0 + 2.0 * xi * xi / (zeta - 1.0)), 0.0);
  return centred_cubic(a2, a1);
}

// a z^3 - (a+1) z^2 + 1 brought to monic centred form by phi(w) = alpha w + beta.
SchemaPolynomial capture_family_poly(double a) {
  const Complex a3(a, 0.0), a2(-(a + 1.0), 0.0), a0(1.0, 0.0);
  const Complex beta = -a2 / (3.0 * a3);
  const Complex alpha = 1.0 / std::sqrt(Complex(a, 0.0));
  const Complex c1 = 3.0 * a3 * beta * beta + 2.0 * a2 * beta;
  const Complex c0 = (a3 * beta * beta * beta + a2 * beta * beta + a0 - beta) / alpha;
  return cubic_poly(c1, c0);
}

// Odd degree-7 map a7 z^7 + a5 z^5 + a3 z^3 + a1 z rescaled to monic form;
// the linear coefficient is scaling-invariant.
SchemaPolynomial deg7_poly(double a7, double a5, double a3, double a1) {
  const double alpha2 = std::pow(a7, -1.0 / 3.0);
  std::vector<Complex> coeffs(6, Complex(0.0, 0.0));
  coeffs[0] = Complex(a5 * alpha2 * alpha2, 0.0);
  coeffs[2] = Complex(a3 * alpha2, 0.0);
  coeffs[4] = Complex(a1, 0.0);
  return SchemaPolynomial{MappingSchema{{"v0"}, {0}, {7}, {}}, {coeffs}};
}

const std::vector<std::pair<std::string, std::string>>& schema_fixtures() {
  static const std::vector<std::pair<std::string, std::string>> items = {
      {"t_adj", "cubic template: both critical gaps in one orbit, adjacent"},
      {"t_bit", "cubic template: critical gaps exchanged by the return map"},
      {"t_cap", "cubic template: one gap captured by the other's orbit"},
      {"t_dis", "cubic template: two disjoint critical orbits"},
      {"quartic_schema", "one vertex of local degree 4"},
  };
  return items;
}

const std::vector<std::pair<std::string, std::string>>& polynomial_fixtures() {
  static const std::vector<std::pair<std::string, std::string>> items = {
      {"square", "z^2"},
      {"basilica_poly", "z^2 - 1"},
      {"chebyshev", "z^2 - 2"},
      {"quartic_poly", "z^4 - 1"},
      {"fmu", "cubic with fixed-point multiplier mu (--mu re,im; default 0)"},
      {"capture_a", "capture family at a = -1/4, recentred: w^3 + (3/4)w + (3/4)i"},
      {"capture_b", "capture family at a = (11 - 3 sqrt(17))/4, recentred"},
      {"tcap", "two quadratic fibers both mapping to the first"},
      {"deg7_a", "odd degree-7 map, first of the pair, monic rescaling"},
      {"deg7_b", "odd degree-7 map, second of the pair, monic rescaling"},
      {"deg7_pair_raw", "both degree-7 maps with their coefficients as given"},
  };
  return items;
}

json fixture_doc(const std::string& name, int depth, Complex mu) {
  for (const fixtures::FixtureInfo& info : fixtures::catalog())
    if (info.name == name) return io::to_json(fixtures::build(name, depth));
  if (name == "t_adj") return io::to_json(cubic_schema(CubicType::adjacent));
  if (name == "t_bit") return io::to_json(cubic_schema(CubicType::bitransitive));
  if (name == "t_cap") return io::to_json(cubic_schema(CubicType::capture));
  if (name == "t_dis") return io::to_json(cubic_schema(CubicType::disjoint));
  if (name == "quartic_schema") return io::to_json(MappingSchema{{"v0"}, {0}, {4}, {}});
  if (name == "square") return io::to_json(unicritical_poly(2, Complex(0.0, 0.0)));
  if (name == "basilica_poly") return io::to_json(unicritical_poly(2, Complex(-1.0, 0.0)));
  if (name == "chebyshev") return io::to_json(unicritical_poly(2, Complex(-2.0, 0.0)));
  if (name == "quartic_poly") return io::to_json(unicritical_poly(4, Complex(-1.0, 0.0)));
  if (name == "fmu") return io::to_json(fmu_poly(mu));
  if (name == "capture_a")
    return io::to_json(cubic_poly(Complex(0.75, 0.0), Complex(0.0, 0.75)));
  if (name == "capture_b")
    return io::to_json(capture_family_poly((11.0 - 3.0 * std::sqrt(17.0)) / 4.0));
  if (name == "tcap") return io::to_json(tcap_poly());
  if (name == "deg7_a") return io::to_json(deg7_poly(0.4590, 2.418, 2.959, 0.0));
  if (name == "deg7_b") return io::to_json(deg7_poly(0.08182, 0.4047, 0.06411, -1.258));
  if (name == "deg7_pair_raw")
    return json{{"family", "odd degree-7 pair"},
                {"g0", {{"z7", 0.4590}, {"z5", 2.418}, {"z3", 2.959}, {"z1", 0.0}}},
                {"g1", {{"z7", 0.08182}, {"z5", 0.4047}, {"z3", 0.06411}, {"z1", -1.258}}}};
  throw std::invalid_argument("unknown fixture: " + name);
}

// ---------------------------------------------------------------------------
// subcommands

int run_verify(const std::string& input, bool json_out) {
  const json doc = load_doc(input);
  std::string kind;
  ValidationReport report;
  if (doc.contains("levels")) {
    kind = "tower";
    report = verify_tower(io::tower_from_json(doc));
  } else if (doc.contains("laminations")) {
    kind = "schema-lamination";
    report = verify_schema_lamination(io::schema_lamination_from_json(doc));
  } else if (doc.contains("coefficients")) {
    kind = "polynomial";
    report = verify_polynomial(io::polynomial_from_json(doc));
  } else if (doc.contains("vertices")) {
    kind = "schema";
    report = validate_schema(io::schema_from_json(doc));
  } else if (doc.contains("classes")) {
    kind = "lamination";
    report = verify_lamination(io::lamination_from_json(doc));
  } else {
    throw std::invalid_argument(
        "unrecognized document: expected a lamination, tower, schema, "
        "schema-lamination, or polynomial");
  }
  if (json_out) {
    json violations = json::array();
    for (const Violation& v : report.violations)
      violations.push_back({{"axiom", v.axiom}, {"detail", v.detail}});
    std::cout << dump(json{{"kind", kind}, {"ok", report.ok()}, {"violations", violations}});
  } else if (report.ok()) {
    std::cout << kind << ": ok\n";
  } else {
    std::cout << kind << ": INVALID\n";
    for (const Violation& v : report.violations)
      std::cout << "  " << v.axiom << ": " << v.detail << "\n";
  }
  return report.ok() ? kOk : kInvalid;
}

int run_pieces(const std::string& input, int depth, bool json_out, const std::string& out_path) {
  const PuzzleTower tower = io::tower_from_json(load_doc(input));
  const PieceTable table(tower);
  if (depth < 0 || depth > table.depth())
    throw std::invalid_argument("depth " + std::to_string(depth) +
                                " not available; the tower is resolved to depth " +
                                std::to_string(table.depth()));
  const std::vector<Piece>& faces = table.at(depth);
  json rows = json::array();
  for (const Piece& p : faces) {
    json row{{"index", p.index},
             {"degree", p.degree},
             {"measure", p.measure.get_str()},
             {"arcs", p.arcs.size()},
             {"boundary_classes", p.boundary_classes}};
    row["parent"] = p.parent == Piece::npos ? json() : json(p.parent);
    row["image"] = p.image == Piece::npos ? json() : json(p.image);
    rows.push_back(row);
  }
  const json doc{{"depth", depth}, {"faces", rows}};
  if (!out_path.empty()) io::write_file(out_path, dump(doc));
  if (json_out) {
    if (out_path.empty()) std::cout << dump(doc);
  } else {
    std::cout << "depth " << depth << ": " << faces.size() << " faces\n";
    for (const Piece& p : faces) std::cout << "  " << p.str() << "\n";
  }
  return kOk;
}

int run_schema(const std::string& input, bool json_out, const std::string& out_path) {
  const PuzzleTower tower = io::tower_from_json(load_doc(input));
  const PieceTable table(tower);
  const MappingSchema schema = reduce_from_tower(table);
  const json doc = io::to_json(schema);
  if (!out_path.empty()) io::write_file(out_path, dump(doc));
  if (json_out) {
    if (out_path.empty()) std::cout << dump(doc);
  } else {
    std::cout << to_string(schema) << "\n";
    if (tower.degree() == 3)
      std::cout << "cubic type: " << to_string(classify_cubic(schema)) << "\n";
  }
  return kOk;
}

int run_markings(const std::string& input, bool json_out) {
  const MappingSchema schema = io::schema_from_json(load_doc(input));
  const std::vector<Marking> markings = enumerate_markings(schema);
  if (json_out) {
    json rows = json::array();
    for (const Marking& m : markings) {
      json row = json::object();
      for (std::size_t v = 0; v < schema.size(); ++v) row[schema.vertices[v]] = m.angles[v].str();
      rows.push_back(row);
    }
    std::cout << dump(json{{"count", markings.size()}, {"markings", rows}});
  } else {
    std::cout << markings.size() << " markings\n";
    for (const Marking& m : markings) {
      std::cout << " ";
      for (std::size_t v = 0; v < schema.size(); ++v)
        std::cout << " " << schema.vertices[v] << ": " << m.angles[v].str();
      std::cout << "\n";
    }
  }
  return kOk;
}

int run_tune(const std::string& input, const std::string& target_path, int budget, bool json_out,
             const std::string& out_path) {
  const PuzzleTower tower = io::tower_from_json(load_doc(input));
  const PieceTable table(tower);
  const SchemaLamination target = io::schema_lamination_from_json(load_doc(target_path));
  const FiniteLamination tuned = tune(table, standard_codings(table), target, budget);
  const json doc = io::to_json(tuned);
  if (!out_path.empty()) io::write_file(out_path, dump(doc));
  if (json_out) {
    if (out_path.empty()) std::cout << dump(doc);
  } else {
    std::cout << "tuned lamination, degree " << tuned.degree() << ", " << tuned.size()
              << " classes\n";
    for (const AngleSet& cls : tuned.classes())
      if (cls.size() >= 2) std::cout << "  " << format_class(cls) << "\n";
  }
  return kOk;
}

int run_straighten(const std::string& input, const std::string& lamination_path, bool json_out,
                   const std::string& out_path) {
  const PuzzleTower tower = io::tower_from_json(load_doc(input));
  const PieceTable table(tower);
  const FiniteLamination lam = lamination_path.empty()
                                   ? tower.level(tower.depth())
                                   : io::lamination_from_json(load_doc(lamination_path));
  const SchemaLamination result = straighten_combinatorial(table, standard_codings(table), lam);
  const json doc = io::to_json(result);
  if (!out_path.empty()) io::write_file(out_path, dump(doc));
  if (json_out) {
    if (out_path.empty()) std::cout << dump(doc);
  } else {
    for (std::size_t v = 0; v < result.schema.size(); ++v) {
      std::cout << result.schema.vertices[v] << ":";
      bool any = false;
      for (const AngleSet& cls : result.laminations[v].classes())
        if (cls.size() >= 2) {
          std::cout << " " << format_class(cls);
          any = true;
        }
      if (!any) std::cout << " trivial";
      std::cout << "\n";
    }
  }
  return kOk;
}

int run_trace(const std::string& input, const std::string& angle_text, std::size_t vertex,
              int levels, int steps, bool json_out, const std::string& out_path) {
  const SchemaPolynomial f = io::polynomial_from_json(load_doc(input));
  if (vertex >= f.schema.size())
    throw std::invalid_argument("vertex " + std::to_string(vertex) + " out of range");
  const Angle angle = Angle::parse(angle_text);
  TraceParams params;
  params.levels = levels;
  params.steps_per_level = steps;
  const RayTrace ray = trace_ray(f, vertex, angle, params);
  if (!out_path.empty()) io::write_file(out_path, io::ray_csv(ray));
  if (json_out) {
    json doc{{"angle", angle.str()},
             {"vertex", f.schema.vertices[vertex]},
             {"status", to_string(ray.status)},
             {"samples", ray.points.size()}};
    doc["landing"] = ray.landing ? json{ray.landing->real(), ray.landing->imag()} : json();
    std::cout << dump(doc);
  } else {
    std::cout << "ray " << angle.str() << " at " << f.schema.vertices[vertex] << ": "
              << to_string(ray.status);
    if (ray.landing) {
      char buf[64];
      std::snprintf(buf, sizeof buf, " at (%.9f, %.9f)", ray.landing->real(),
                    ray.landing->imag());
      std::cout << buf;
    }
    std::cout << " after " << ray.points.size() << " samples\n";
  }
  return ray.status == RayStatus::landed ? kOk : kNumerical;
}

int run_sample(const std::string& input, const std::string& angles_path, double epsilon,
               std::size_t vertex, bool json_out, const std::string& out_path) {
  const SchemaPolynomial f = io::polynomial_from_json(load_doc(input));
  const AngleSet support = parse_angle_file(io::read_file(angles_path));
  const SampledLamination sampled = sample_lamination(f, support, epsilon, vertex);
  const json doc = io::to_json(sampled.lamination);
  if (!out_path.empty()) io::write_file(out_path, dump(doc));
  if (json_out) {
    if (out_path.empty()) std::cout << dump(doc);
  } else {
    std::cout << "sampled lamination, " << sampled.lamination.size() << " classes\n";
    for (const AngleSet& cls : sampled.lamination.classes())
      std::cout << "  " << format_class(cls) << "\n";
  }
  for (const auto& [angle, status] : sampled.unresolved)
    std::cerr << "unresolved: ray " << angle.str() << " " << to_string(status) << "\n";
  if (!sampled.unresolved.empty()) return kNumerical;
  return sampled.report.ok() ? kOk : kInvalid;
}

int run_render_lam(const std::string& input, int size, bool labels, const std::string& out_path) {
  const json doc = load_doc(input);
  SvgStyle style;
  style.size = size;
  style.labels = labels;
  const std::string svg = doc.contains("levels")
                              ? lamination_svg(io::tower_from_json(doc), style)
                              : lamination_svg(io::lamination_from_json(doc), style);
  emit(svg, out_path);
  return kOk;
}

int run_render_julia(const std::string& input, const std::string& out_path, int nx, int ny,
                     double width, const std::string& center_text, int max_iter, bool binary,
                     int workers, const std::vector<std::string>& rays,
                     const std::vector<std::string>& overlay_paths, std::size_t overlay_vertex) {
  const SchemaPolynomial f = io::polynomial_from_json(load_doc(input));
  RasterSpec spec;
  spec.nx = nx;
  spec.ny = ny;
  spec.width = width;
  spec.center = parse_complex(center_text);
  spec.max_iter = max_iter;
  spec.coloring = binary ? Coloring::binary : Coloring::smooth;
  for (const std::string& text : rays) {
    const RayTrace ray = trace_ray(f, overlay_vertex, Angle::parse(text));
    spec.overlays.push_back(Overlay{overlay_vertex, ray.points});
  }
  for (const std::string& path : overlay_paths)
    spec.overlays.push_back(Overlay{overlay_vertex, io::polyline_from_csv(io::read_file(path))});
  const Raster raster = julia_raster(f, spec, workers_or_env(workers));
  io::write_file(out_path, png_bytes(raster));
  std::cout << "wrote " << raster.width << "x" << raster.height << " png to " << out_path
            << "\n";
  return kOk;
}

int run_fixtures(const std::string& action, const std::string& name, int depth,
                 const std::string& mu_text, bool json_out, const std::string& out_path) {
  if (action == "list") {
    if (json_out) {
      json rows = json::array();
      for (const fixtures::FixtureInfo& info : fixtures::catalog())
        rows.push_back({{"name", info.name},
                        {"kind", "tower"},
                        {"degree", info.degree},
                        {"default_depth", info.default_depth},
                        {"summary", info.summary}});
      for (const auto& [fixture_name, summary] : schema_fixtures())
        rows.push_back({{"name", fixture_name}, {"kind", "schema"}, {"summary", summary}});
      for (const auto& [fixture_name, summary] : polynomial_fixtures())
        rows.push_back({{"name", fixture_name}, {"kind", "polynomial"}, {"summary", summary}});
      std::cout << dump(rows);
      return kOk;
    }
    std::cout << "towers:\n";
    for (const fixtures::FixtureInfo& info : fixtures::catalog()) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "  %-14s degree %d, default depth %d  %s", info.name.c_str(),
                    info.degree, info.default_depth, info.summary.c_str());
      std::cout << buf << "\n";
    }
    std::cout << "schemata:\n";
    for (const auto& [fixture_name, summary] : schema_fixtures()) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "  %-14s %s", fixture_name.c_str(), summary.c_str());
      std::cout << buf << "\n";
    }
    std::cout << "polynomials:\n";
    for (const auto& [fixture_name, summary] : polynomial_fixtures()) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "  %-14s %s", fixture_name.c_str(), summary.c_str());
      std::cout << buf << "\n";
    }
    return kOk;
  }
  if (action == "emit") {
    if (name.empty()) throw std::invalid_argument("fixtures emit needs a fixture name");
    const json doc = fixture_doc(name, depth, parse_complex(mu_text));
    emit(dump(doc), out_path);
    return kOk;
  }
  throw std::invalid_argument("fixtures action must be 'list' or 'emit'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"laminations, puzzle towers, mapping schemata, and polynomial dynamics"};
  app.require_subcommand(1);
  int rc = kOk;

  struct {
    std::string input;
    bool json = false;
  } verify_opts;
  CLI::App* verify = app.add_subcommand("verify", "check a JSON document against its axioms");
  verify->add_option("input", verify_opts.input, "lamination/tower/schema/polynomial document")
      ->required();
  verify->add_flag("--json", verify_opts.json, "machine-readable report");
  verify->callback([&] { rc = run_verify(verify_opts.input, verify_opts.json); });

  struct {
    std::string input, out;
    int depth = 0;
    bool json = false;
  } pieces_opts;
  CLI::App* pieces = app.add_subcommand("pieces", "list the puzzle faces of one tower level");
  pieces->add_option("input", pieces_opts.input, "tower document")->required();
  pieces->add_option("--depth", pieces_opts.depth, "level to list")->required();
  pieces->add_flag("--json", pieces_opts.json, "emit the face table as JSON");
  pieces->add_option("--out", pieces_opts.out, "write the JSON face table to a file");
  pieces->callback([&] {
    rc = run_pieces(pieces_opts.input, pieces_opts.depth, pieces_opts.json, pieces_opts.out);
  });

  struct {
    std::string input, out;
    bool json = false;
  } schema_opts;
  CLI::App* schema_cmd =
      app.add_subcommand("schema", "reduce a tower to its mapping schema (and classify cubics)");
  schema_cmd->add_option("input", schema_opts.input, "tower document")->required();
  schema_cmd->add_flag("--json", schema_opts.json, "emit the schema document");
  schema_cmd->add_option("--out", schema_opts.out, "write the schema document to a file");
  schema_cmd->callback(
      [&] { rc = run_schema(schema_opts.input, schema_opts.json, schema_opts.out); });

  struct {
    std::string input;
    bool json = false;
  } markings_opts;
  CLI::App* markings = app.add_subcommand("markings", "enumerate external markings of a schema");
  markings->add_option("input", markings_opts.input, "schema document")->required();
  markings->add_flag("--json", markings_opts.json, "machine-readable list");
  markings->callback([&] { rc = run_markings(markings_opts.input, markings_opts.json); });

  struct {
    std::string input, target, out;
    int budget = 0;
    bool json = false;
  } tune_opts;
  CLI::App* tune_cmd =
      app.add_subcommand("tune", "insert a schema lamination into a tower's critical gaps");
  tune_cmd->add_option("input", tune_opts.input, "tower document")->required();
  tune_cmd->add_option("--target", tune_opts.target, "schema-lamination document")->required();
  tune_cmd->add_option("--budget", tune_opts.budget, "pullback depth budget (0 = automatic)");
  tune_cmd->add_flag("--json", tune_opts.json, "emit the tuned lamination document");
  tune_cmd->add_option("--out", tune_opts.out, "write the tuned lamination to a file");
  tune_cmd->callback([&] {
    rc = run_tune(tune_opts.input, tune_opts.target, tune_opts.budget, tune_opts.json,
                  tune_opts.out);
  });

  struct {
    std::string input, lamination, out;
    bool json = false;
  } straighten_opts;
  CLI::App* straighten =
      app.add_subcommand("straighten", "read a schema lamination back off a tuned relation");
  straighten->add_option("input", straighten_opts.input, "tower document")->required();
  straighten->add_option("--lamination", straighten_opts.lamination,
                         "lamination document (default: the tower's deepest level)");
  straighten->add_flag("--json", straighten_opts.json, "emit the schema-lamination document");
  straighten->add_option("--out", straighten_opts.out, "write the document to a file");
  straighten->callback([&] {
    rc = run_straighten(straighten_opts.input, straighten_opts.lamination, straighten_opts.json,
                        straighten_opts.out);
  });

  struct {
    std::string input, angle, out;
    std::size_t vertex = 0;
    int levels = 128;
    int steps = 4;
    bool json = false;
  } trace_opts;
  CLI::App* trace = app.add_subcommand("trace", "follow one external ray inward");
  trace->add_option("input", trace_opts.input, "polynomial document")->required();
  trace->add_option("--angle", trace_opts.angle, "ray angle p/q")->required();
  trace->add_option("--vertex", trace_opts.vertex, "fiber to trace in (default first)");
  trace->add_option("--levels", trace_opts.levels, "potential halvings to attempt");
  trace->add_option("--steps", trace_opts.steps, "samples per halving");
  trace->add_flag("--json", trace_opts.json, "machine-readable summary");
  trace->add_option("--out", trace_opts.out, "write the polyline as CSV");
  trace->callback([&] {
    rc = run_trace(trace_opts.input, trace_opts.angle, trace_opts.vertex, trace_opts.levels,
                   trace_opts.steps, trace_opts.json, trace_opts.out);
  });

  struct {
    std::string input, angles, out;
    double epsilon = 1e-4;
    std::size_t vertex = 0;
    bool json = false;
  } sample_opts;
  CLI::App* sample =
      app.add_subcommand("sample", "sample a rational lamination from co-landing rays");
  sample->add_option("input", sample_opts.input, "polynomial document")->required();
  sample->add_option("--angles", sample_opts.angles, "file of p/q angles (JSON array or tokens)")
      ->required();
  sample->add_option("--epsilon", sample_opts.epsilon, "landing identification tolerance");
  sample->add_option("--vertex", sample_opts.vertex, "fiber to sample in (default first)");
  sample->add_flag("--json", sample_opts.json, "emit the lamination document");
  sample->add_option("--out", sample_opts.out, "write the lamination document to a file");
  sample->callback([&] {
    rc = run_sample(sample_opts.input, sample_opts.angles, sample_opts.epsilon,
                    sample_opts.vertex, sample_opts.json, sample_opts.out);
  });

  struct {
    std::string input, out;
    int size = 800;
    bool labels = false;
  } render_lam_opts;
  CLI::App* render_lam =
      app.add_subcommand("render-lam", "draw a lamination or tower as an SVG disk diagram");
  render_lam->add_option("input", render_lam_opts.input, "lamination or tower document")
      ->required();
  render_lam->add_option("--size", render_lam_opts.size, "square pixel size");
  render_lam->add_flag("--labels", render_lam_opts.labels, "annotate angles");
  render_lam->add_option("--out", render_lam_opts.out, "write the SVG to a file");
  render_lam->callback([&] {
    rc = run_render_lam(render_lam_opts.input, render_lam_opts.size, render_lam_opts.labels,
                        render_lam_opts.out);
  });

  struct {
    std::string input, out, center = "0,0";
    int nx = 512, ny = 512, max_iter = 128, workers = 0;
    double width = 4.0;
    bool binary = false;
    std::vector<std::string> rays, overlays;
    std::size_t overlay_vertex = 0;
  } julia_opts;
  CLI::App* render_julia =
      app.add_subcommand("render-julia", "raster the fiberwise Julia sets as a PNG");
  render_julia->add_option("input", julia_opts.input, "polynomial document")->required();
  render_julia->add_option("--out", julia_opts.out, "output PNG path")->required();
  render_julia->add_option("--nx", julia_opts.nx, "panel width in pixels");
  render_julia->add_option("--ny", julia_opts.ny, "panel height in pixels");
  render_julia->add_option("--width", julia_opts.width, "viewport side length");
  render_julia->add_option("--center", julia_opts.center, "viewport centre re,im");
  render_julia->add_option("--max-iter", julia_opts.max_iter, "escape iteration cap");
  render_julia->add_flag("--binary", julia_opts.binary, "filled-set coloring");
  render_julia->add_option("--workers", julia_opts.workers,
                           "render threads (0 = all cores, THREADS env honored)");
  render_julia->add_option("--ray", julia_opts.rays, "overlay the ray at this angle (repeatable)");
  render_julia->add_option("--overlay", julia_opts.overlays,
                           "overlay a CSV polyline file (repeatable)");
  render_julia->add_option("--overlay-vertex", julia_opts.overlay_vertex,
                           "panel receiving the overlays");
  render_julia->callback([&] {
    rc = run_render_julia(julia_opts.input, julia_opts.out, julia_opts.nx, julia_opts.ny,
                          julia_opts.width, julia_opts.center, julia_opts.max_iter,
                          julia_opts.binary, julia_opts.workers, julia_opts.rays,
                          julia_opts.overlays, julia_opts.overlay_vertex);
  });

  struct {
    std::string action, name, mu = "0,0", out;
    int depth = -1;
    bool json = false;
  } fixtures_opts;
  CLI::App* fixtures_cmd = app.add_subcommand("fixtures", "list or emit the stock examples");
  fixtures_cmd->add_option("action", fixtures_opts.action, "'list' or 'emit'")->required();
  fixtures_cmd->add_option("name", fixtures_opts.name, "fixture to emit");
  fixtures_cmd->add_option("--depth", fixtures_opts.depth, "tower depth (-1 = fixture default)");
  fixtures_cmd->add_option("--mu", fixtures_opts.mu, "multiplier re,im for the fmu family");
  fixtures_cmd->add_flag("--json", fixtures_opts.json, "machine-readable listing");
  fixtures_cmd->add_option("--out", fixtures_opts.out, "write the document to a file");
  fixtures_cmd->callback([&] {
    rc = run_fixtures(fixtures_opts.action, fixtures_opts.name, fixtures_opts.depth,
                      fixtures_opts.mu, fixtures_opts.json, fixtures_opts.out);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  }
  return rc;
}
