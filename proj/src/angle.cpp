#include "lamina/angle.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <utility>

namespace lamina {

namespace {

void require_degree(int d) {
  if (d < 2) throw std::invalid_argument("invalid degree " + std::to_string(d) + " (need d >= 2)");
}

// Reduce v into [0,1) in place; v must already be canonical.
void mod_one(mpq_class& v) {
  mpz_class fl;
  mpz_fdiv_q(fl.get_mpz_t(), v.get_num_mpz_t(), v.get_den_mpz_t());
  if (fl != 0) v -= mpq_class(fl);
}

}  // namespace

Angle::Angle(mpq_class v) : v_(std::move(v)) {
  if (v_.get_den() == 0) throw std::invalid_argument("angle: zero denominator");
  v_.canonicalize();
  mod_one(v_);
}

Angle::Angle(long num, long den) : Angle(mpq_class(num, den)) {}

Angle Angle::parse(const std::string& text) {
  std::string t;
  t.reserve(text.size());
  for (char c : text)
    if (c != ' ' && c != '\t') t.push_back(c);
  if (t.empty()) throw std::invalid_argument("angle: empty string");
  mpq_class q;
  if (mpq_set_str(q.get_mpq_t(), t.c_str(), 10) != 0)
    throw std::invalid_argument("angle: cannot parse '" + text + "'");
  if (q.get_den() == 0)
    throw std::invalid_argument("angle: zero denominator in '" + text + "'");
  return Angle(std::move(q));
}

std::string Angle::str() const {
  if (v_ == 0) return "0";
  return v_.get_str();
}

mpq_class arc_length(const Angle& from, const Angle& to) {
  mpq_class len = to.value() - from.value();
  if (len < 0) len += 1;
  return len;
}

bool Arc::contains(const Angle& a) const {
  if (start == end) return a != start;
  if (start < end) return start < a && a < end;
  return a > start || a < end;
}

mpq_class Arc::measure() const {
  if (start == end) return {1};
  return arc_length(start, end);
}

std::string Arc::str() const {
  return "(" + start.str() + "," + end.str() + ")";
}

AngleSet::AngleSet(std::initializer_list<Angle> init)
    : AngleSet(std::vector<Angle>(init)) {}

AngleSet::AngleSet(std::vector<Angle> elems) : elems_(std::move(elems)) {
  std::sort(elems_.begin(), elems_.end());
  elems_.erase(std::unique(elems_.begin(), elems_.end()), elems_.end());
}

bool AngleSet::contains(const Angle& a) const {
  return std::binary_search(elems_.begin(), elems_.end(), a);
}

std::optional<std::size_t> AngleSet::index_of(const Angle& a) const {
  auto it = std::lower_bound(elems_.begin(), elems_.end(), a);
  if (it == elems_.end() || *it != a) return std::nullopt;
  return static_cast<std::size_t>(it - elems_.begin());
}

std::size_t AngleSet::cyclic_upper_bound(const Angle& a) const {
  if (elems_.empty()) throw std::logic_error("cyclic_upper_bound on empty set");
  auto it = std::upper_bound(elems_.begin(), elems_.end(), a);
  if (it == elems_.end()) return 0;
  return static_cast<std::size_t>(it - elems_.begin());
}

void AngleSet::insert(const Angle& a) {
  auto it = std::lower_bound(elems_.begin(), elems_.end(), a);
  if (it != elems_.end() && *it == a) return;
  elems_.insert(it, a);
}

void AngleSet::insert_all(const AngleSet& other) {
  std::vector<Angle> merged;
  merged.reserve(elems_.size() + other.size());
  std::merge(elems_.begin(), elems_.end(), other.begin(), other.end(),
             std::back_inserter(merged));
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
  elems_ = std::move(merged);
}

std::string AngleSet::str() const {
  std::string out = "{";
  for (std::size_t i = 0; i < elems_.size(); ++i) {
    if (i) out += ", ";
    out += elems_[i].str();
  }
  out += "}";
  return out;
}

Angle map_d(const Angle& theta, int d) {
  require_degree(d);
  return Angle(mpq_class(theta.value() * d));
}

AngleSet map_d(const AngleSet& set, int d) {
  require_degree(d);
  std::vector<Angle> out;
  out.reserve(set.size());
  for (const Angle& a : set) out.push_back(map_d(a, d));
  return AngleSet(std::move(out));
}

AngleSet preimages(const Angle& theta, int d) {
  require_degree(d);
  std::vector<Angle> out;
  out.reserve(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k)
    out.emplace_back(mpq_class((theta.value() + k) / d));
  return AngleSet(std::move(out));
}

AngleSet preimages(const AngleSet& set, int d) {
  require_degree(d);
  std::vector<Angle> out;
  out.reserve(set.size() * static_cast<std::size_t>(d));
  for (const Angle& a : set)
    for (int k = 0; k < d; ++k)
      out.emplace_back(mpq_class((a.value() + k) / d));
  return AngleSet(std::move(out));
}

Orbit orbit(const Angle& theta, int d) {
  require_degree(d);
  Orbit result;
  std::map<Angle, std::size_t> seen;
  Angle cur = theta;
  while (true) {
    auto [it, fresh] = seen.emplace(cur, result.trajectory.size());
    if (!fresh) {
      result.preperiod = static_cast<int>(it->second);
      result.period = static_cast<int>(result.trajectory.size() - it->second);
      return result;
    }
    result.trajectory.push_back(cur);
    cur = map_d(cur, d);
  }
}

bool unlinked(const AngleSet& a, const AngleSet& b) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("unlinked: sets must be non-empty");
  for (const Angle& x : b)
    if (a.contains(x)) return false;
  if (a.size() == 1) return true;  // complement of a point is one arc
  // Locate the gap of `a` holding b[0]; every other element must share it.
  const std::size_t hi = a.cyclic_upper_bound(b[0]);
  const std::size_t lo = (hi + a.size() - 1) % a.size();
  const Arc gap{a[lo], a[hi]};
  for (const Angle& x : b)
    if (!gap.contains(x)) return false;
  return true;
}

}  // namespace lamina
