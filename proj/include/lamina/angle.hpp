#pragma once

#include <gmpxx.h>

#include <compare>
#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace lamina {

// Rational point of the circle R/Z, canonical representative in [0,1),
// always in lowest terms. Arbitrary precision: pullback denominators grow
// like d^k and must never overflow.
class Angle {
 public:
  Angle() : v_(0) {}
  explicit Angle(mpq_class v);
  Angle(long num, long den);

  // Accepts "p/q" or a bare integer; value is reduced mod 1.
  static Angle parse(const std::string& text);

  const mpq_class& value() const { return v_; }
  mpz_class num() const { return v_.get_num(); }
  mpz_class den() const { return v_.get_den(); }
  bool is_zero() const { return v_ == 0; }
  double to_double() const { return v_.get_d(); }

  // "p/q" in lowest terms; the zero angle prints as "0".
  std::string str() const;

  friend bool operator==(const Angle& a, const Angle& b) {
    return cmp(a.v_, b.v_) == 0;
  }
  friend std::strong_ordering operator<=>(const Angle& a, const Angle& b) {
    const int c = cmp(a.v_, b.v_);
    if (c < 0) return std::strong_ordering::less;
    if (c > 0) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

 private:
  mpq_class v_;
};

inline std::ostream& operator<<(std::ostream& os, const Angle& a) {
  return os << a.str();
}

// Length of the counterclockwise arc from `from` to `to`, in [0,1).
mpq_class arc_length(const Angle& from, const Angle& to);

// Open cyclic interval traversed counterclockwise from start to end.
// start == end denotes the full circle minus that single point.
struct Arc {
  Angle start;
  Angle end;

  bool contains(const Angle& a) const;
  mpq_class measure() const;
  std::string str() const;

  friend bool operator==(const Arc&, const Arc&) = default;
};

// Strictly increasing, duplicate-free set of angles in [0,1).
class AngleSet {
 public:
  AngleSet() = default;
  AngleSet(std::initializer_list<Angle> init);
  explicit AngleSet(std::vector<Angle> elems);

  std::size_t size() const { return elems_.size(); }
  bool empty() const { return elems_.empty(); }
  const Angle& operator[](std::size_t i) const { return elems_[i]; }
  const std::vector<Angle>& elements() const { return elems_; }
  auto begin() const { return elems_.begin(); }
  auto end() const { return elems_.end(); }

  bool contains(const Angle& a) const;
  std::optional<std::size_t> index_of(const Angle& a) const;
  // Index of the first element strictly greater than `a`, cyclically
  // (wraps to 0 past the last element). Set must be non-empty.
  std::size_t cyclic_upper_bound(const Angle& a) const;

  void insert(const Angle& a);
  void insert_all(const AngleSet& other);

  std::string str() const;  // "{p/q, p/q, ...}"

  friend bool operator==(const AngleSet&, const AngleSet&) = default;

 private:
  std::vector<Angle> elems_;
};

// --- the degree-d angle map ---

// d * theta mod 1. Degrees below 2 are rejected.
Angle map_d(const Angle& theta, int d);
AngleSet map_d(const AngleSet& set, int d);

// The d preimages (theta + k)/d, k = 0..d-1, sorted.
AngleSet preimages(const Angle& theta, int d);
AngleSet preimages(const AngleSet& set, int d);

struct Orbit {
  int preperiod = 0;  // steps before the cycle is entered
  int period = 1;
  std::vector<Angle> trajectory;  // theta, m_d theta, ...; no repetitions
};

// Forward orbit of theta under m_d up to the first repetition.
Orbit orbit(const Angle& theta, int d);

// True iff A and B are disjoint and B lies inside a single component of
// R/Z minus A (equivalently their convex hulls in the disk are disjoint).
// Symmetric. Both sets must be non-empty.
bool unlinked(const AngleSet& a, const AngleSet& b);

}  // namespace lamina
