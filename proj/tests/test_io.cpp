#include <doctest.h>

#include <stdexcept>
#include <vector>

#include "lamina/angle_system.hpp"
#include "lamina/fixtures.hpp"
#include "lamina/io.hpp"
#include "lamina/schema.hpp"
#include "lamina/tower.hpp"

using namespace lamina;

namespace {

AngleSet cls(std::initializer_list<const char*> angles) {
  std::vector<Angle> out;
  for (const char* s : angles) out.push_back(Angle::parse(s));
  return AngleSet(out);
}

}  // namespace

TEST_CASE("tower documents round-trip through parse and emit") {
  for (const char* name : {"basilica", "rabbit", "airplane", "quartic", "cubic_odd",
                           "cubic_capture", "cubic_pinched", "septic_split", "septic_fused"}) {
    CAPTURE(name);
    const PuzzleTower tower = fixtures::build(name, -1);
    const io::json doc = io::to_json(tower);
    const PuzzleTower back = io::tower_from_json(doc);
    CHECK(back.degree() == tower.degree());
    REQUIRE(back.depth() == tower.depth());
    for (int k = 0; k <= tower.depth(); ++k) CHECK(back.level(k) == tower.level(k));
    // Identical values emit identical bytes.
    CHECK(io::to_json(back).dump(2) == doc.dump(2));
  }
}

TEST_CASE("tower documents match the documented literal shape") {
  const PuzzleTower tower = fixtures::build("rabbit", 1);
  const io::json doc = io::to_json(tower);
  CHECK(doc["degree"] == 2);
  REQUIRE(doc["levels"].size() == 2);
  CHECK(doc["levels"][0]["classes"] == io::json::parse(R"([["1/7","2/7","4/7"]])"));
  CHECK(doc["levels"][1]["classes"] ==
        io::json::parse(R"([["1/14","9/14","11/14"],["1/7","2/7","4/7"]])"));
}

TEST_CASE("lamination documents round-trip and reject malformed input") {
  const FiniteLamination lam(2, {cls({"1/3", "2/3"}), cls({"1/6", "5/6"})});
  CHECK(io::lamination_from_json(io::to_json(lam)) == lam);

  CHECK_THROWS_AS(io::lamination_from_json(io::json::parse(R"({"degree": 2})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(io::lamination_from_json(io::json::parse(R"({"classes": []})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      io::lamination_from_json(io::json::parse(R"({"degree": 2, "classes": [["1/x"]]})")),
      std::invalid_argument);
  CHECK_THROWS_AS(io::tower_from_json(io::json::parse(R"({"degree": 2, "levels": []})")),
                  std::invalid_argument);
}

TEST_CASE("schema documents round-trip with and without return times") {
  for (const char* name : {"basilica", "cubic_odd", "cubic_capture", "septic_split",
                           "septic_fused"}) {
    CAPTURE(name);
    const PieceTable pieces(fixtures::build(name, -1));
    const MappingSchema schema = reduce_from_tower(pieces);
    CHECK(io::schema_from_json(io::to_json(schema)) == schema);
  }

  MappingSchema bare;
  bare.vertices = {"a", "b"};
  bare.sigma = {1, 0};
  bare.delta = {2, 2};
  const io::json doc = io::to_json(bare);
  CHECK(!doc.contains("return_times"));
  CHECK(io::schema_from_json(doc) == bare);
  CHECK(doc["sigma"]["a"] == "b");
  CHECK(doc["delta"]["b"] == 2);

  CHECK_THROWS_AS(
      io::schema_from_json(io::json::parse(R"({"vertices": ["a"], "sigma": {}, "delta": {}})")),
      std::invalid_argument);
}

TEST_CASE("schema lamination and root choice documents round-trip") {
  const PieceTable pieces(fixtures::build("basilica", 3));
  SchemaLamination doc;
  doc.schema = reduce_from_tower(pieces);
  doc.laminations.push_back(FiniteLamination(2, {cls({"1/7", "2/7", "4/7"})}));
  const SchemaLamination back = io::schema_lamination_from_json(io::to_json(doc));
  CHECK(back == doc);

  const GapCoding coding = gap_coding(pieces, 0);
  const io::json choice = io::to_json(coding);
  CHECK(choice["gap"] == "v0");
  const io::RootChoice parsed = io::root_choice_from_json(choice);
  CHECK(parsed.gap == "v0");
  CHECK(parsed.root == coding.root);
  CHECK_THROWS_AS(io::root_choice_from_json(io::json::parse(R"({"gap": "v0", "root": []})")),
                  std::invalid_argument);
}

TEST_CASE("polynomial documents round-trip exactly") {
  SchemaPolynomial f;
  f.schema.vertices = {"v0", "v1"};
  f.schema.sigma = {0, 0};
  f.schema.delta = {2, 3};
  f.coefficients = {{Complex(-1.0, 0.0)},
                    {Complex(0.3423567815265342, -2.25), Complex(1e-17, 3.0)}};
  const io::json doc = io::to_json(f);
  const SchemaPolynomial back = io::polynomial_from_json(doc);
  CHECK(back == f);

  // Count mismatch against delta is rejected.
  io::json bad = doc;
  bad["coefficients"]["v1"] = io::json::parse(R"([["1","0"]])");
  CHECK_THROWS_AS(io::polynomial_from_json(bad), std::invalid_argument);
}

TEST_CASE("ray traces export as csv and read back as polylines") {
  RayTrace ray;
  ray.vertex = 0;
  ray.angle = Angle::parse("1/3");
  ray.points = {Complex(2.0, 1.5), Complex(1.25, 0.5), Complex(-0.61803398874989484, 0.0)};
  ray.potentials = {0.75, 0.375, 0.1875};
  ray.landing = ray.points.back();
  ray.status = RayStatus::landed;

  const std::string csv = io::ray_csv(ray);
  CHECK(csv.substr(0, 16) == "potential,re,im\n");
  const std::vector<Complex> line = io::polyline_from_csv(csv);
  REQUIRE(line.size() == 3);
  for (std::size_t i = 0; i < line.size(); ++i) CHECK(line[i] == ray.points[i]);

  CHECK_THROWS_AS(io::polyline_from_csv("0.5,1.0\n"), std::invalid_argument);
}
