#include <doctest.h>

#include "lamina/lamination.hpp"

using namespace lamina;

namespace {
AngleSet cls(std::initializer_list<const char*> angles) {
  std::vector<Angle> v;
  for (const char* s : angles) v.push_back(Angle::parse(s));
  return AngleSet(v);
}
}  // namespace

TEST_CASE("construction canonicalizes") {
  FiniteLamination lam(
      2, {cls({"2/3", "1/3", "1/3"}), AngleSet{}, cls({"1/6", "5/6"})});
  REQUIRE(lam.size() == 2);
  CHECK(lam.class_at(0) == cls({"1/6", "5/6"}));  // sorted by smallest element
  CHECK(lam.class_at(1) == cls({"1/3", "2/3"}));
  CHECK(lam.support().size() == 4);
  CHECK(lam.class_index_of(Angle(2, 3)) == 1);
  CHECK(!lam.class_index_of(Angle(1, 2)).has_value());
  CHECK_THROWS_AS(FiniteLamination(1, {}), std::invalid_argument);
}

TEST_CASE("valid single class") {
  FiniteLamination lam(2, {cls({"1/3", "2/3"})});
  CHECK(verify_lamination(lam).ok());
}

TEST_CASE("linked pair is reported with witnesses") {
  FiniteLamination lam(2, {cls({"0", "1/2"}), cls({"1/4", "3/4"})});
  auto report = verify_lamination(lam);
  REQUIRE(!report.ok());
  REQUIRE(report.violations.size() == 1);
  CHECK(report.violations[0].axiom == "classes-unlinked");
  CHECK(report.violations[0].detail.find("{0, 1/2}") != std::string::npos);
  CHECK(report.violations[0].detail.find("{1/4, 3/4}") != std::string::npos);
}

TEST_CASE("rabbit pair of classes is valid") {
  FiniteLamination lam(
      2, {cls({"1/7", "2/7", "4/7"}), cls({"1/14", "9/14", "11/14"})});
  CHECK(verify_lamination(lam).ok());
}

TEST_CASE("overlapping classes are reported once per pair") {
  FiniteLamination lam(2, {cls({"1/3", "2/3"}), cls({"2/3", "5/6"})});
  auto report = verify_lamination(lam);
  REQUIRE(report.violations.size() == 1);
  CHECK(report.violations[0].axiom == "classes-disjoint");
  CHECK(report.violations[0].detail.find("2/3") != std::string::npos);
}

TEST_CASE("singletons never link anything") {
  FiniteLamination lam(3, {cls({"0", "1/2"}), cls({"1/4"}), cls({"3/4"})});
  CHECK(verify_lamination(lam).ok());
}

TEST_CASE("nested non-crossing classes are unlinked") {
  FiniteLamination lam(2, {cls({"1/7", "2/7", "4/7"}), cls({"3/14", "1/4"})});
  CHECK(verify_lamination(lam).ok());
}
