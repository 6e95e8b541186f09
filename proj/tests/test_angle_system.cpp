#include <doctest.h>

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "lamina/angle_system.hpp"
#include "lamina/fixtures.hpp"
#include "lamina/schema.hpp"
#include "lamina/tower.hpp"

using namespace lamina;

namespace {

Angle ang(const char* s) { return Angle::parse(s); }

AngleSet cls(std::initializer_list<const char*> angles) {
  std::vector<Angle> out;
  for (const char* s : angles) out.push_back(Angle::parse(s));
  return AngleSet(out);
}

PieceTable table_for(const char* name, int depth) {
  return PieceTable(fixtures::build(name, depth));
}

// ---------------------------------------------------------------------------
// Independent closure oracle for tuning.
//
// The tuned relation is by definition the smallest equivalence containing
// the tower's classes and the transported target classes.  This oracle takes
// those generators as explicit literal lists and merges any two sets that
// share an angle until nothing changes — quadratic, order-free, and with no
// knowledge of how the library unions or propagates.
// ---------------------------------------------------------------------------
std::vector<AngleSet> brute_closure(std::vector<AngleSet> classes) {
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < classes.size() && !changed; ++i)
      for (std::size_t j = i + 1; j < classes.size() && !changed; ++j) {
        const bool meets = std::any_of(classes[i].begin(), classes[i].end(),
                                       [&](const Angle& a) { return classes[j].contains(a); });
        if (meets) {
          classes[i].insert_all(classes[j]);
          classes.erase(classes.begin() + static_cast<std::ptrdiff_t>(j));
          changed = true;
        }
      }
  }
  return classes;
}

// Schema lamination with `classes` at vertex 0 and trivial data elsewhere.
SchemaLamination target_at_first_vertex(const PieceTable& pieces, std::vector<AngleSet> classes) {
  SchemaLamination out;
  out.schema = reduce_from_tower(pieces);
  for (std::size_t v = 0; v < out.schema.size(); ++v)
    out.laminations.push_back(FiniteLamination(
        out.schema.delta[v], v == 0 ? classes : std::vector<AngleSet>{}));
  return out;
}

}  // namespace

TEST_CASE("coding of the basilica gap") {
  const PieceTable pieces = table_for("basilica", 3);
  const GapCoding coding = gap_coding(pieces, 0);

  CHECK(coding.vertex == 0);
  CHECK(coding.ambient_degree == 2);
  CHECK(coding.period == 2);
  CHECK(coding.degree == 2);
  CHECK(coding.root == cls({"1/3", "2/3"}));
  REQUIRE(coding.sectors.size() == 2);
  CHECK(coding.sectors[0] == coding.root);
  CHECK(coding.sectors[1] == cls({"1/6", "5/6"}));
  REQUIRE(coding.spans.size() == 2);
  CHECK(coding.spans[0] == Arc{ang("2/3"), ang("5/6")});
  CHECK(coding.spans[1] == Arc{ang("1/6"), ang("1/3")});

  // Sector labels: bounding classes open their own sector, interior angles
  // resolve by span.
  CHECK(sector_of(coding, ang("1/3")) == 0);
  CHECK(sector_of(coding, ang("2/3")) == 0);
  CHECK(sector_of(coding, ang("1/6")) == 1);
  CHECK(sector_of(coding, ang("5/6")) == 1);
  CHECK(sector_of(coding, ang("17/24")) == 0);
  CHECK(sector_of(coding, ang("19/24")) == 0);
  CHECK(sector_of(coding, ang("5/24")) == 1);
  CHECK(sector_of(coding, ang("7/24")) == 1);
  CHECK(sector_of(coding, ang("4/5")) == 0);
  CHECK(sector_of(coding, ang("1/5")) == 1);

  CHECK(on_gap_boundary(coding, ang("4/5")));
  CHECK(!on_gap_boundary(coding, ang("1/2")));   // behind the root chord
  CHECK(!on_gap_boundary(coding, ang("18/25")));  // strictly inside a pocket

  // The root hint must name a return-fixed boundary class.
  const GapCoding hinted = gap_coding(pieces, 0, ang("2/3"));
  CHECK(hinted.root == coding.root);
  CHECK_THROWS_WITH_AS(gap_coding(pieces, 0, ang("1/2")), doctest::Contains("not in a known"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(gap_coding(pieces, 0, ang("1/6")),
                       doctest::Contains("must be return-fixed"), std::invalid_argument);

  const std::vector<GapCoding> codings = standard_codings(pieces);
  REQUIRE(codings.size() == 1);
  CHECK(codings[0].root == coding.root);
}

TEST_CASE("coding of the rabbit gap") {
  const PieceTable pieces = table_for("rabbit", 3);
  const GapCoding coding = gap_coding(pieces, 0);

  CHECK(coding.period == 3);
  CHECK(coding.degree == 2);
  CHECK(coding.root == cls({"1/7", "2/7", "4/7"}));
  REQUIRE(coding.sectors.size() == 2);
  CHECK(coding.sectors[1] == cls({"1/14", "9/14", "11/14"}));
  CHECK(coding.spans[0] == Arc{ang("4/7"), ang("9/14")});
  CHECK(coding.spans[1] == Arc{ang("1/14"), ang("1/7")});
}

TEST_CASE("alpha pins the internal angles of basilica boundary points") {
  const PieceTable pieces = table_for("basilica", 3);
  const GapCoding coding = gap_coding(pieces, 0);

  // Hand values: the root is 0, the class mapping onto it is 1/2, and the
  // two pocket classes sit at 1/4 and 3/4.
  CHECK(alpha(coding, ang("1/3")) == ang("0"));
  CHECK(alpha(coding, ang("2/3")) == ang("0"));
  CHECK(alpha(coding, ang("1/6")) == ang("1/2"));
  CHECK(alpha(coding, ang("5/6")) == ang("1/2"));
  CHECK(alpha(coding, ang("17/24")) == ang("1/4"));
  CHECK(alpha(coding, ang("19/24")) == ang("1/4"));
  CHECK(alpha(coding, ang("5/24")) == ang("3/4"));
  CHECK(alpha(coding, ang("7/24")) == ang("3/4"));

  // Periodic boundary points that the finite tower never lists as classes:
  // 4/5 and 1/5 swap under the return and code the fixed internal pair
  // 1/3, 2/3; 7/10 and 3/10 are their sector-0/1 preimages.
  CHECK(alpha(coding, ang("4/5")) == ang("1/3"));
  CHECK(alpha(coding, ang("1/5")) == ang("2/3"));
  CHECK(alpha(coding, ang("7/10")) == ang("1/6"));
  CHECK(alpha(coding, ang("3/10")) == ang("5/6"));
  CHECK(alpha(coding, ang("17/96")) == ang("5/8"));
  CHECK(alpha(coding, ang("19/96")) == ang("5/8"));

  CHECK_THROWS_WITH_AS(alpha(coding, ang("1/2")), doctest::Contains("not on the known boundary"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(alpha(coding, ang("18/25")),
                       doctest::Contains("not on the known boundary"), std::invalid_argument);

  // At depth 2 the pocket chord {17/24, 19/24} is not yet known, so 18/25 is
  // provisionally accepted — and refused honestly once its return orbit
  // leaves the resolved boundary.
  const GapCoding shallow = gap_coding(table_for("basilica", 2), 0);
  CHECK(on_gap_boundary(shallow, ang("18/25")));
  CHECK_THROWS_WITH_AS(alpha(shallow, ang("18/25")), doctest::Contains("insufficient depth"),
                       std::invalid_argument);
}

TEST_CASE("alpha pins the internal angles of rabbit boundary points") {
  const PieceTable pieces = table_for("rabbit", 3);
  const GapCoding coding = gap_coding(pieces, 0);

  CHECK(alpha(coding, ang("1/7")) == ang("0"));
  CHECK(alpha(coding, ang("2/7")) == ang("0"));
  CHECK(alpha(coding, ang("4/7")) == ang("0"));
  CHECK(alpha(coding, ang("1/14")) == ang("1/2"));
  CHECK(alpha(coding, ang("9/14")) == ang("1/2"));
  CHECK(alpha(coding, ang("11/14")) == ang("1/2"));

  // A depth-4 landing point known at depth 3 only as three arc-interior
  // angles: all of them must agree.
  CHECK(alpha(coding, ang("65/112")) == ang("1/4"));
  CHECK(alpha(coding, ang("67/112")) == ang("1/4"));
  CHECK(alpha(coding, ang("71/112")) == ang("1/4"));

  // The period-two pair of the return.
  CHECK(alpha(coding, ang("40/63")) == ang("1/3"));
  CHECK(alpha(coding, ang("5/63")) == ang("2/3"));
}

TEST_CASE("alpha is class-constant and equivariant on every coded fixture") {
  const struct {
    const char* name;
    int depth;
  } cases[] = {{"basilica", 3}, {"rabbit", 3}, {"airplane", 4}, {"quartic", 2}, {"cubic_odd", 2}};
  for (const auto& fixture : cases) {
    CAPTURE(fixture.name);
    const PieceTable pieces = table_for(fixture.name, fixture.depth);
    const std::vector<GapCoding> codings = standard_codings(pieces);
    REQUIRE(!codings.empty());
    for (const GapCoding& coding : codings) {
      CHECK(alpha(coding, coding.root[0]) == ang("0"));
      for (const AngleSet& boundary_class : coding.boundary) {
        const Angle value = alpha(coding, boundary_class[0]);
        for (const Angle& a : boundary_class) CHECK(alpha(coding, a) == value);

        // One return outside multiplies the internal angle by the degree.
        Angle forward = boundary_class[0];
        for (int i = 0; i < coding.period; ++i) forward = map_d(forward, coding.ambient_degree);
        CHECK(alpha(coding, forward) == map_d(value, coding.degree));
      }
    }
  }
}

TEST_CASE("alpha_inverse recovers basilica boundary points from internal angles") {
  const PieceTable pieces = table_for("basilica", 3);
  const GapCoding coding = gap_coding(pieces, 0);

  CHECK(alpha_inverse(coding, ang("0")) == cls({"1/3", "2/3"}));
  CHECK(alpha_inverse(coding, ang("1/2")) == cls({"1/6", "5/6"}));
  CHECK(alpha_inverse(coding, ang("1/4")) == cls({"17/24", "19/24"}));
  CHECK(alpha_inverse(coding, ang("3/4")) == cls({"5/24", "7/24"}));

  // Points beyond the stored classes come back as the angles themselves.
  CHECK(alpha_inverse(coding, ang("1/3")) == cls({"4/5"}));
  CHECK(alpha_inverse(coding, ang("2/3")) == cls({"1/5"}));
  CHECK(alpha_inverse(coding, ang("1/6")) == cls({"7/10"}));
  CHECK(alpha_inverse(coding, ang("5/6")) == cls({"3/10"}));
  CHECK(alpha_inverse(coding, ang("1/7")) == cls({"44/63"}));
  CHECK(alpha_inverse(coding, ang("2/7")) == cls({"50/63"}));
  CHECK(alpha_inverse(coding, ang("4/7")) == cls({"11/63"}));

  // A landing point whose two rays are both resolved, though its class is
  // one level beyond the stored tower, comes back as the full pair.
  CHECK(alpha_inverse(coding, ang("5/8")) == cls({"17/96", "19/96"}));
}

TEST_CASE("alpha_inverse recovers rabbit boundary points from internal angles") {
  const PieceTable pieces = table_for("rabbit", 3);
  const GapCoding coding = gap_coding(pieces, 0);

  CHECK(alpha_inverse(coding, ang("0")) == cls({"1/7", "2/7", "4/7"}));
  CHECK(alpha_inverse(coding, ang("1/2")) == cls({"1/14", "9/14", "11/14"}));
  CHECK(alpha_inverse(coding, ang("1/3")) == cls({"40/63"}));
  // Regression: this pullback repeats a branch word once before converging;
  // a premature affine solve used to refuse it.
  CHECK(alpha_inverse(coding, ang("2/3")) == cls({"5/63"}));
  CHECK(alpha_inverse(coding, ang("1/4")) == cls({"65/112", "67/112", "71/112"}));
}

TEST_CASE("alpha and alpha_inverse round-trip on every coded fixture") {
  const struct {
    const char* name;
    int depth;
  } cases[] = {{"basilica", 3}, {"rabbit", 3}, {"airplane", 4}, {"quartic", 2}, {"cubic_odd", 2}};
  const char* internal[] = {"0", "1/2", "1/3", "2/3", "1/5", "3/7", "5/12"};
  for (const auto& fixture : cases) {
    CAPTURE(fixture.name);
    const PieceTable pieces = table_for(fixture.name, fixture.depth);
    for (const GapCoding& coding : standard_codings(pieces)) {
      // Every stored boundary class is recovered exactly from its value.
      for (const AngleSet& boundary_class : coding.boundary)
        CHECK(alpha_inverse(coding, alpha(coding, boundary_class[0])) == boundary_class);
      // Every internal angle on the grid is realized and reads back.
      for (const char* text : internal) {
        CAPTURE(text);
        const AngleSet point = alpha_inverse(coding, ang(text));
        REQUIRE(!point.empty());
        for (const Angle& a : point) CHECK(alpha(coding, a) == ang(text));
      }
    }
  }
}

TEST_CASE("gaps without a return-fixed boundary class refuse a coding") {
  // Both degree-7 towers return their critical gaps onto period-two class
  // pairs; the return fixes boundary points but no stored class, so the
  // coding is honestly unresolvable there.
  const PieceTable split = table_for("septic_split", 1);
  CHECK_THROWS_WITH_AS(gap_coding(split, 0), doctest::Contains("no return-fixed boundary class"),
                       std::invalid_argument);
  CHECK(standard_codings(split).empty());
  CHECK(standard_codings(table_for("septic_fused", 1)).empty());

  // And gaps on longer sigma-cycles are not coded at all.
  CHECK_THROWS_WITH_AS(gap_coding(table_for("septic_fused", 1), 0),
                       doctest::Contains("only self-returning"), std::invalid_argument);
}

TEST_CASE("schema laminations verify shape, per-vertex axioms and pushforward") {
  const PieceTable pieces = table_for("basilica", 3);
  const MappingSchema schema = reduce_from_tower(pieces);

  SchemaLamination good;
  good.schema = schema;
  good.laminations.push_back(FiniteLamination(2, {cls({"1/3", "2/3"})}));
  CHECK(verify_schema_lamination(good).ok());

  SchemaLamination missing;
  missing.schema = schema;
  CHECK(!verify_schema_lamination(missing).ok());

  SchemaLamination wrong_degree;
  wrong_degree.schema = schema;
  wrong_degree.laminations.push_back(FiniteLamination(3, {cls({"1/3", "2/3"})}));
  {
    const ValidationReport report = verify_schema_lamination(wrong_degree);
    CHECK(std::any_of(report.violations.begin(), report.violations.end(),
                      [](const Violation& v) { return v.axiom == "vertex-degree"; }));
  }

  SchemaLamination stray_image;
  stray_image.schema = schema;
  stray_image.laminations.push_back(FiniteLamination(2, {cls({"1/5", "2/5"})}));
  {
    const ValidationReport report = verify_schema_lamination(stray_image);
    CHECK(std::any_of(report.violations.begin(), report.violations.end(),
                      [](const Violation& v) { return v.axiom == "pushforward-onto-class"; }));
  }

  SchemaLamination collapsing;
  collapsing.schema = schema;
  collapsing.laminations.push_back(FiniteLamination(2, {cls({"1/4", "3/4"})}));
  {
    const ValidationReport report = verify_schema_lamination(collapsing);
    CHECK(std::any_of(report.violations.begin(), report.violations.end(),
                      [](const Violation& v) { return v.axiom == "pushforward-collapse"; }));
  }
}

TEST_CASE("tune carries the rabbit into the basilica gap") {
  const PieceTable pieces = table_for("basilica", 3);
  const std::vector<GapCoding> codings = standard_codings(pieces);
  const SchemaLamination target =
      target_at_first_vertex(pieces, {cls({"1/7", "2/7", "4/7"})});

  const FiniteLamination tuned = tune(pieces, codings, target);

  // Oracle: the tower's own classes plus the transported class and its
  // forward image, closed by brute-force merging.
  std::vector<AngleSet> generators;
  for (const AngleSet& c : pieces.tower().level(3).classes()) generators.push_back(c);
  generators.push_back(cls({"11/63", "44/63", "50/63"}));
  generators.push_back(cls({"22/63", "25/63", "37/63"}));
  const FiniteLamination expected(2, brute_closure(generators));

  CHECK(tuned == expected);
  CHECK(verify_lamination(tuned).ok());
  const auto& classes = tuned.classes();
  CHECK(std::find(classes.begin(), classes.end(), cls({"11/63", "44/63", "50/63"})) !=
        classes.end());
  CHECK(std::find(classes.begin(), classes.end(), cls({"22/63", "25/63", "37/63"})) !=
        classes.end());
}

TEST_CASE("tune carries the basilica into itself and into the rabbit gap") {
  {
    const PieceTable pieces = table_for("basilica", 3);
    const std::vector<GapCoding> codings = standard_codings(pieces);
    const FiniteLamination tuned =
        tune(pieces, codings, target_at_first_vertex(pieces, {cls({"1/3", "2/3"})}));
    std::vector<AngleSet> generators;
    for (const AngleSet& c : pieces.tower().level(3).classes()) generators.push_back(c);
    generators.push_back(cls({"1/5", "4/5"}));
    generators.push_back(cls({"2/5", "3/5"}));
    CHECK(tuned == FiniteLamination(2, brute_closure(generators)));
  }
  {
    const PieceTable pieces = table_for("rabbit", 3);
    const std::vector<GapCoding> codings = standard_codings(pieces);
    const FiniteLamination tuned =
        tune(pieces, codings, target_at_first_vertex(pieces, {cls({"1/3", "2/3"})}));
    const auto& classes = tuned.classes();
    CHECK(std::find(classes.begin(), classes.end(), cls({"5/63", "40/63"})) != classes.end());
    CHECK(std::find(classes.begin(), classes.end(), cls({"10/63", "17/63"})) != classes.end());
    CHECK(std::find(classes.begin(), classes.end(), cls({"20/63", "34/63"})) != classes.end());
  }
}

TEST_CASE("tune with a trivial target reproduces the tower's own relation") {
  const PieceTable pieces = table_for("basilica", 3);
  const std::vector<GapCoding> codings = standard_codings(pieces);
  const FiniteLamination tuned = tune(pieces, codings, target_at_first_vertex(pieces, {}));
  CHECK(tuned == FiniteLamination(2, pieces.tower().level(3).classes()));
}

TEST_CASE("tune refuses mismatched schemata, missing codings and small budgets") {
  const PieceTable basilica = table_for("basilica", 3);
  const std::vector<GapCoding> codings = standard_codings(basilica);

  // The rabbit's reduced schema returns in three steps, the basilica's in
  // two, so the target does not match.
  const PieceTable rabbit = table_for("rabbit", 3);
  CHECK_THROWS_WITH_AS(
      tune(basilica, codings, target_at_first_vertex(rabbit, {cls({"1/7", "2/7", "4/7"})})),
      doctest::Contains("does not match"), std::invalid_argument);

  // Budget 2 cannot resolve the three repeating digits of 1/7.
  CHECK_THROWS_WITH_AS(
      tune(basilica, codings, target_at_first_vertex(basilica, {cls({"1/7", "2/7", "4/7"})}), 2),
      doctest::Contains("a budget of 3 suffices"), std::invalid_argument);

  // An explicit budget that does cover the digits agrees with the default.
  CHECK(tune(basilica, codings, target_at_first_vertex(basilica, {cls({"1/7", "2/7", "4/7"})}),
             12) ==
        tune(basilica, codings, target_at_first_vertex(basilica, {cls({"1/7", "2/7", "4/7"})})));

  // A non-trivial target at an uncoded vertex is refused by name.
  const PieceTable fused = table_for("septic_fused", 1);
  SchemaLamination fused_target;
  fused_target.schema = reduce_from_tower(fused);
  for (std::size_t v = 0; v < fused_target.schema.size(); ++v)
    fused_target.laminations.push_back(FiniteLamination(
        fused_target.schema.delta[v],
        (v == 0 || v == 2) ? std::vector<AngleSet>{cls({"1/3", "2/3"})}
                           : std::vector<AngleSet>{}));
  REQUIRE(verify_schema_lamination(fused_target).ok());
  CHECK_THROWS_WITH_AS(tune(fused, standard_codings(fused), fused_target),
                       doctest::Contains("no coding for vertex v0"), std::invalid_argument);

  // An invalid target is rejected before any transport happens.
  SchemaLamination bad = target_at_first_vertex(basilica, {cls({"1/5", "2/5"})});
  CHECK_THROWS_WITH_AS(tune(basilica, codings, bad), doctest::Contains("not a valid schema"),
                       std::invalid_argument);
}

TEST_CASE("straighten reads a tuned relation back as its target") {
  const PieceTable pieces = table_for("basilica", 3);
  const std::vector<GapCoding> codings = standard_codings(pieces);
  const SchemaLamination target =
      target_at_first_vertex(pieces, {cls({"1/7", "2/7", "4/7"})});

  const FiniteLamination tuned = tune(pieces, codings, target);
  const SchemaLamination back = straighten_combinatorial(pieces, codings, tuned);

  CHECK(back.schema == target.schema);
  REQUIRE(back.laminations.size() == 1);
  CHECK(back.laminations[0] == target.laminations[0]);
  CHECK(verify_schema_lamination(back).ok());
}

TEST_CASE("straighten of the tower's own relation is trivial everywhere") {
  for (const char* name : {"basilica", "rabbit"}) {
    CAPTURE(name);
    const PieceTable pieces = table_for(name, 3);
    const std::vector<GapCoding> codings = standard_codings(pieces);
    const SchemaLamination flat = straighten_combinatorial(
        pieces, codings, pieces.tower().level(pieces.depth()));
    for (const FiniteLamination& lam : flat.laminations) CHECK(lam.size() == 0);
    CHECK(verify_schema_lamination(flat).ok());
  }
}

TEST_CASE("straighten after tune is the identity across the quadratic grid") {
  const struct {
    const char* name;
    int depth;
  } bases[] = {{"basilica", 3}, {"rabbit", 3}, {"airplane", 4}};
  const std::vector<std::vector<AngleSet>> targets = {
      {},
      {cls({"1/3", "2/3"})},
      {cls({"1/7", "2/7", "4/7"})},
  };
  for (const auto& base : bases) {
    CAPTURE(base.name);
    const PieceTable pieces = table_for(base.name, base.depth);
    const std::vector<GapCoding> codings = standard_codings(pieces);
    for (std::size_t t = 0; t < targets.size(); ++t) {
      CAPTURE(t);
      const SchemaLamination target = target_at_first_vertex(pieces, targets[t]);
      const FiniteLamination tuned = tune(pieces, codings, target, 12);
      const SchemaLamination back = straighten_combinatorial(pieces, codings, tuned);
      CHECK(back == target);
    }
  }
}
