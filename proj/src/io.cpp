#include "lamina/io.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lamina::io {
namespace {

json classes_to_json(const std::vector<AngleSet>& classes) {
  json out = json::array();
  for (const AngleSet& cls : classes) {
    json one = json::array();
    for (const Angle& a : cls) one.push_back(a.str());
    out.push_back(std::move(one));
  }
  return out;
}

std::vector<AngleSet> classes_from_json(const json& doc) {
  if (!doc.is_array()) throw std::invalid_argument("document: \"classes\" must be an array");
  std::vector<AngleSet> out;
  for (const json& one : doc) {
    if (!one.is_array()) throw std::invalid_argument("document: each class must be an array");
    std::vector<Angle> angles;
    for (const json& a : one) angles.push_back(Angle::parse(a.get<std::string>()));
    out.push_back(AngleSet(std::move(angles)));
  }
  return out;
}

int degree_from_json(const json& doc) {
  if (!doc.contains("degree") || !doc["degree"].is_number_integer())
    throw std::invalid_argument("document: missing integer \"degree\"");
  return doc["degree"].get<int>();
}

// Shortest decimal that re-reads as the same double.
std::string format_double(double x) {
  char buf[40];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

}  // namespace

json to_json(const FiniteLamination& lam) {
  return json{{"degree", lam.degree()}, {"classes", classes_to_json(lam.classes())}};
}

json to_json(const PuzzleTower& tower) {
  json levels = json::array();
  for (const FiniteLamination& level : tower.levels())
    levels.push_back(json{{"classes", classes_to_json(level.classes())}});
  return json{{"degree", tower.degree()}, {"levels", std::move(levels)}};
}

json to_json(const MappingSchema& schema) {
  json sigma = json::object();
  json delta = json::object();
  for (std::size_t v = 0; v < schema.size(); ++v) {
    sigma[schema.vertices[v]] = schema.vertices[schema.sigma[v]];
    delta[schema.vertices[v]] = schema.delta[v];
  }
  json out{{"vertices", schema.vertices}, {"sigma", std::move(sigma)},
           {"delta", std::move(delta)}};
  if (!schema.return_times.empty()) {
    json times = json::object();
    for (std::size_t v = 0; v < schema.size(); ++v)
      times[schema.vertices[v]] = schema.return_times[v];
    out["return_times"] = std::move(times);
  }
  return out;
}

json to_json(const SchemaLamination& doc) {
  json laminations = json::object();
  for (std::size_t v = 0; v < doc.schema.size(); ++v)
    laminations[doc.schema.vertices[v]] = to_json(doc.laminations.at(v));
  return json{{"schema", to_json(doc.schema)}, {"laminations", std::move(laminations)}};
}

json to_json(const GapCoding& coding) {
  json root = json::array();
  for (const Angle& a : coding.root) root.push_back(a.str());
  return json{{"gap", "v" + std::to_string(coding.vertex)}, {"root", std::move(root)}};
}

json to_json(const SchemaPolynomial& f) {
  json coefficients = json::object();
  for (std::size_t v = 0; v < f.schema.size(); ++v) {
    json list = json::array();
    for (const Complex& c : f.coefficients.at(v))
      list.push_back(json::array({format_double(c.real()), format_double(c.imag())}));
    coefficients[f.schema.vertices[v]] = std::move(list);
  }
  return json{{"schema", to_json(f.schema)}, {"coefficients", std::move(coefficients)}};
}

FiniteLamination lamination_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("classes"))
    throw std::invalid_argument("lamination document: expected {degree, classes}");
  return FiniteLamination(degree_from_json(doc), classes_from_json(doc["classes"]));
}

PuzzleTower tower_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("levels") || !doc["levels"].is_array())
    throw std::invalid_argument("tower document: expected {degree, levels}");
  const int degree = degree_from_json(doc);
  std::vector<FiniteLamination> levels;
  for (const json& level : doc["levels"]) {
    if (!level.is_object() || !level.contains("classes"))
      throw std::invalid_argument("tower document: each level needs \"classes\"");
    levels.push_back(FiniteLamination(degree, classes_from_json(level["classes"])));
  }
  if (levels.empty()) throw std::invalid_argument("tower document: no levels");
  return PuzzleTower(std::move(levels));
}

MappingSchema schema_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("vertices") || !doc.contains("sigma") ||
      !doc.contains("delta"))
    throw std::invalid_argument("schema document: expected {vertices, sigma, delta}");
  MappingSchema schema;
  schema.vertices = doc["vertices"].get<std::vector<std::string>>();
  for (const std::string& name : schema.vertices) {
    if (!doc["sigma"].contains(name) || !doc["delta"].contains(name))
      throw std::invalid_argument("schema document: vertex " + name +
                                  " missing from sigma or delta");
    schema.delta.push_back(doc["delta"][name].get<int>());
  }
  for (const std::string& name : schema.vertices)
    schema.sigma.push_back(schema.index_of(doc["sigma"][name].get<std::string>()));
  if (doc.contains("return_times"))
    for (const std::string& name : schema.vertices)
      schema.return_times.push_back(doc["return_times"][name].get<int>());
  return schema;
}

SchemaLamination schema_lamination_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("schema") || !doc.contains("laminations"))
    throw std::invalid_argument("schema lamination document: expected {schema, laminations}");
  SchemaLamination out;
  out.schema = schema_from_json(doc["schema"]);
  for (std::size_t v = 0; v < out.schema.size(); ++v) {
    const std::string& name = out.schema.vertices[v];
    if (!doc["laminations"].contains(name))
      throw std::invalid_argument("schema lamination document: no lamination for " + name);
    out.laminations.push_back(lamination_from_json(doc["laminations"][name]));
  }
  return out;
}

RootChoice root_choice_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("gap") || !doc.contains("root"))
    throw std::invalid_argument("root choice document: expected {gap, root}");
  std::vector<Angle> angles;
  for (const json& a : doc["root"]) angles.push_back(Angle::parse(a.get<std::string>()));
  if (angles.empty()) throw std::invalid_argument("root choice document: empty root");
  return RootChoice{doc["gap"].get<std::string>(), AngleSet(std::move(angles))};
}

SchemaPolynomial polynomial_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("schema") || !doc.contains("coefficients"))
    throw std::invalid_argument("polynomial document: expected {schema, coefficients}");
  SchemaPolynomial f;
  f.schema = schema_from_json(doc["schema"]);
  for (std::size_t v = 0; v < f.schema.size(); ++v) {
    const std::string& name = f.schema.vertices[v];
    if (!doc["coefficients"].contains(name))
      throw std::invalid_argument("polynomial document: no coefficients for " + name);
    std::vector<Complex> list;
    for (const json& pair : doc["coefficients"][name]) {
      if (!pair.is_array() || pair.size() != 2)
        throw std::invalid_argument("polynomial document: coefficients are [re, im] pairs");
      list.push_back(Complex(std::strtod(pair[0].get<std::string>().c_str(), nullptr),
                             std::strtod(pair[1].get<std::string>().c_str(), nullptr)));
    }
    if (static_cast<int>(list.size()) != f.schema.delta[v] - 1)
      throw std::invalid_argument("polynomial document: " + name + " needs " +
                                  std::to_string(f.schema.delta[v] - 1) + " coefficients");
    f.coefficients.push_back(std::move(list));
  }
  return f;
}

std::string ray_csv(const RayTrace& ray) {
  std::string out = "potential,re,im\n";
  for (std::size_t i = 0; i < ray.points.size(); ++i) {
    out += format_double(ray.potentials.at(i));
    out += ',';
    out += format_double(ray.points[i].real());
    out += ',';
    out += format_double(ray.points[i].imag());
    out += '\n';
  }
  return out;
}

std::vector<Complex> polyline_from_csv(const std::string& text) {
  std::vector<Complex> out;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty() || std::isalpha(static_cast<unsigned char>(line[0]))) continue;
    double potential = 0, re = 0, im = 0;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &potential, &re, &im) != 3)
      throw std::invalid_argument("ray csv: malformed line '" + line + "'");
    out.push_back(Complex(re, im));
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace lamina::io
