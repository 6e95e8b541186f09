#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "lamina/angle.hpp"

namespace lamina {

// One check failure, with enough context to point at the offending data.
struct Violation {
  std::string axiom;   // short machine-friendly tag, e.g. "classes-disjoint"
  std::string detail;  // human-readable witness description
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  void add(std::string axiom, std::string detail) {
    violations.push_back({std::move(axiom), std::move(detail)});
  }
  void merge(const ValidationReport& other) {
    violations.insert(violations.end(), other.violations.begin(),
                      other.violations.end());
  }
};

// A finite equivalence relation on a finite set of rational angles, tagged
// with the degree of the circle map it is meant to interact with.
//
// Construction is permissive: it canonicalizes the data (dedupes angles
// within a class, drops empty classes, sorts classes by smallest element)
// but does not reject overlapping or linked classes — invalid relations are
// representable so that verify_lamination can report on them.  Only a
// degree below 2 is rejected outright.
class FiniteLamination {
 public:
  FiniteLamination(int degree, std::vector<AngleSet> classes);

  int degree() const { return degree_; }
  const AngleSet& support() const { return support_; }
  const std::vector<AngleSet>& classes() const { return classes_; }
  std::size_t size() const { return classes_.size(); }
  const AngleSet& class_at(std::size_t i) const { return classes_.at(i); }

  // Index of the class containing `a`, if any.  With overlapping (invalid)
  // data this returns the first class in canonical order.
  std::optional<std::size_t> class_index_of(const Angle& a) const;

  // Classes with at least two elements, in canonical order.
  std::vector<std::size_t> nontrivial_indices() const;

  bool operator==(const FiniteLamination& o) const {
    return degree_ == o.degree_ && classes_ == o.classes_;
  }

 private:
  int degree_;
  std::vector<AngleSet> classes_;
  AngleSet support_;
  std::vector<std::size_t> class_of_;  // class index per support position
};

// Checks that the classes are pairwise disjoint and pairwise unlinked.
// Reports every failure with a witness pair.
ValidationReport verify_lamination(const FiniteLamination& lam);

std::string to_string(const FiniteLamination& lam);

}  // namespace lamina
