#include "lamina/lamination.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace lamina {

FiniteLamination::FiniteLamination(int degree, std::vector<AngleSet> classes)
    : degree_(degree) {
  if (degree < 2) throw std::invalid_argument("lamination degree must be >= 2");
  for (auto& c : classes) {
    if (!c.empty()) classes_.push_back(std::move(c));
  }
  std::sort(classes_.begin(), classes_.end(),
            [](const AngleSet& a, const AngleSet& b) { return a[0] < b[0]; });
  std::vector<Angle> all;
  for (const auto& c : classes_) all.insert(all.end(), c.begin(), c.end());
  support_ = AngleSet(std::move(all));
  // Angle -> class lookup aligned with the support; filled in reverse so the
  // first class in canonical order wins at an (invalid) shared angle.
  class_of_.assign(support_.size(), 0);
  for (std::size_t i = classes_.size(); i-- > 0;) {
    for (const Angle& a : classes_[i]) class_of_[*support_.index_of(a)] = i;
  }
}

std::optional<std::size_t> FiniteLamination::class_index_of(const Angle& a) const {
  const auto pos = support_.index_of(a);
  if (!pos) return std::nullopt;
  return class_of_[*pos];
}

std::vector<std::size_t> FiniteLamination::nontrivial_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < classes_.size(); ++i) {
    if (classes_[i].size() > 1) out.push_back(i);
  }
  return out;
}

ValidationReport verify_lamination(const FiniteLamination& lam) {
  ValidationReport report;
  const auto& cs = lam.classes();
  std::size_t total = 0;
  for (const AngleSet& c : cs) total += c.size();
  const bool overlap = total != lam.support().size();
  if (!overlap) {
    // Disjoint classes list the support in strict cyclic order, so one stack
    // sweep certifies pairwise unlinkedness in near-linear time; the
    // quadratic witness searches below run only on invalid data.
    const AngleSet& sup = lam.support();
    std::vector<std::size_t> open;
    std::vector<std::size_t> seen(cs.size(), 0);
    bool crossing = false;
    for (std::size_t i = 0; i < sup.size() && !crossing; ++i) {
      const std::size_t c = *lam.class_index_of(sup[i]);
      if (seen[c] == 0) {
        open.push_back(c);
      } else if (open.back() != c) {
        crossing = true;
        break;
      }
      if (++seen[c] == cs[c].size()) open.pop_back();
    }
    if (!crossing) return report;
  }
  for (std::size_t i = 0; overlap && i < cs.size(); ++i) {
    for (std::size_t j = i + 1; j < cs.size(); ++j) {
      for (const Angle& a : cs[i]) {
        if (cs[j].contains(a)) {
          report.add("classes-disjoint",
                     "classes " + cs[i].str() + " and " + cs[j].str() +
                         " share angle " + a.str());
          break;
        }
      }
    }
  }
  auto nontrivial = lam.nontrivial_indices();
  for (std::size_t ii = 0; ii < nontrivial.size(); ++ii) {
    for (std::size_t jj = ii + 1; jj < nontrivial.size(); ++jj) {
      const AngleSet& A = cs[nontrivial[ii]];
      const AngleSet& B = cs[nontrivial[jj]];
      bool disjoint = true;
      for (const Angle& a : A) {
        if (B.contains(a)) { disjoint = false; break; }
      }
      if (!disjoint) continue;  // already reported as a disjointness failure
      if (!unlinked(A, B)) {
        report.add("classes-unlinked",
                   "classes " + A.str() + " and " + B.str() + " are linked");
      }
    }
  }
  return report;
}

std::string to_string(const FiniteLamination& lam) {
  std::ostringstream os;
  os << "lamination(d=" << lam.degree() << ", {";
  for (std::size_t i = 0; i < lam.size(); ++i) {
    if (i) os << ", ";
    os << lam.class_at(i).str();
  }
  os << "})";
  return os.str();
}

}  // namespace lamina
