#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "lamina/angle_system.hpp"
#include "lamina/dynamics.hpp"
#include "lamina/lamination.hpp"
#include "lamina/schema.hpp"
#include "lamina/tower.hpp"

// Document formats.  All angles travel as exact "p/q" strings and every
// emitter is deterministic, so parse(emit(x)) == x and identical values give
// identical bytes.
//
//   lamination        { "degree": d, "classes": [["1/7","2/7","4/7"], ...] }
//   tower             { "degree": d, "levels": [{ "classes": [...] }, ...] }
//   schema            { "vertices": [...], "sigma": {"v0":"v0", ...},
//                       "delta": {"v0":2, ...}, "return_times": {...}? }
//   schema lamination { "schema": <schema>, "laminations": {"v0": <lamination>, ...} }
//   root choice       { "gap": "v0", "root": ["1/3","2/3"] }
//   polynomial        { "schema": <schema>,
//                       "coefficients": {"v0": [["re","im"], ...], ...} }
//                     listing the monic centered coefficients from
//                     z^{delta-2} down to the constant term
//   ray trace         CSV with header "potential,re,im"
namespace lamina::io {

using json = nlohmann::json;

json to_json(const FiniteLamination& lam);
json to_json(const PuzzleTower& tower);
json to_json(const MappingSchema& schema);
json to_json(const SchemaLamination& doc);
json to_json(const GapCoding& coding);  // root-choice document
json to_json(const SchemaPolynomial& f);

FiniteLamination lamination_from_json(const json& doc);
PuzzleTower tower_from_json(const json& doc);
MappingSchema schema_from_json(const json& doc);
SchemaLamination schema_lamination_from_json(const json& doc);

// A named gap with a chosen root class, as read from a root-choice document.
struct RootChoice {
  std::string gap;
  AngleSet root;
};
RootChoice root_choice_from_json(const json& doc);

SchemaPolynomial polynomial_from_json(const json& doc);

std::string ray_csv(const RayTrace& ray);
std::vector<Complex> polyline_from_csv(const std::string& text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

}  // namespace lamina::io
